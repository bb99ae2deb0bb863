//! Partition comparison against simulation truths.

use std::fmt;

use crate::error::{Error, Result};

/// Whether two partitions of the same observations are identical up to
/// relabeling.
pub fn partitions_equal(a: &[usize], b: &[usize]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut forward = std::collections::HashMap::new();
    let mut backward = std::collections::HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimum number of observations whose labels disagree over all
/// one-to-one matchings of the two label sets.
pub fn misclassification_count(found: &[usize], truth: &[usize]) -> Result<usize> {
    if found.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: found.len(),
            right: truth.len(),
        });
    }
    let index = |labels: &[usize]| {
        let mut map = std::collections::HashMap::new();
        let idx: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        (idx, map.len())
    };
    let (f, kf) = index(found);
    let (t, kt) = index(truth);
    // pad to a square table so every label can be matched
    let k = kf.max(kt);
    if k > 20 {
        return Err(Error::InvalidConfig(format!(
            "label matching supports at most 20 labels, got {k}"
        )));
    }
    let mut table = vec![0usize; k * k];
    for (&a, &b) in f.iter().zip(&t) {
        table[a * k + b] += 1;
    }
    // best[mask] = max agreements matching found labels 0..popcount(mask)
    // to the truth labels in mask
    let mut best = vec![0usize; 1 << k];
    for mask in 0usize..(1 << k) {
        let row = mask.count_ones() as usize;
        if row >= k {
            continue;
        }
        for col in 0..k {
            if mask & (1 << col) == 0 {
                let next = mask | (1 << col);
                best[next] = best[next].max(best[mask] + table[row * k + col]);
            }
        }
    }
    Ok(found.len() - best[(1 << k) - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerMatch {
    Effect1,
    Effect2,
    Neither,
}

impl fmt::Display for LayerMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerMatch::Effect1 => "Effect 1",
            LayerMatch::Effect2 => "Effect 2",
            LayerMatch::Neither => "Neither",
        })
    }
}

/// Which truth the first and the second layer recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EffectClassification {
    pub first: LayerMatch,
    pub second: LayerMatch,
}

impl EffectClassification {
    /// The categories in the order the simulation tables list them.
    pub const CATEGORIES: [EffectClassification; 7] = {
        use LayerMatch::*;
        [
            Self {
                first: Effect1,
                second: Effect2,
            },
            Self {
                first: Effect2,
                second: Effect1,
            },
            Self {
                first: Effect1,
                second: Neither,
            },
            Self {
                first: Effect2,
                second: Neither,
            },
            Self {
                first: Neither,
                second: Neither,
            },
            Self {
                first: Neither,
                second: Effect1,
            },
            Self {
                first: Neither,
                second: Effect2,
            },
        ]
    };
}

impl fmt::Display for EffectClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.first, self.second)
    }
}

/// How close a layer must be to a truth to count as recovering it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchCriterion {
    #[default]
    Exact,
    MaxOneError,
}

fn layer_match(
    layer: &[usize],
    e1: &[usize],
    e2: &[usize],
    criterion: MatchCriterion,
) -> Result<LayerMatch> {
    let hit = |truth: &[usize]| -> Result<bool> {
        match criterion {
            MatchCriterion::Exact => partitions_equal(layer, truth),
            MatchCriterion::MaxOneError => Ok(misclassification_count(layer, truth)? <= 1),
        }
    };
    Ok(if hit(e1)? {
        LayerMatch::Effect1
    } else if hit(e2)? {
        LayerMatch::Effect2
    } else {
        LayerMatch::Neither
    })
}

/// Classifies a primary/secondary layer pair against the two simulated
/// truths. A secondary layer that only re-finds the primary layer's effect
/// recovered nothing new and counts as `Neither`.
pub fn classify_layers(
    primary: &[usize],
    secondary: &[usize],
    effect1: &[usize],
    effect2: &[usize],
    criterion: MatchCriterion,
) -> Result<EffectClassification> {
    let first = layer_match(primary, effect1, effect2, criterion)?;
    let mut second = layer_match(secondary, effect1, effect2, criterion)?;
    if second == first {
        second = LayerMatch::Neither;
    }
    Ok(EffectClassification { first, second })
}
