//! Distribution tails, contingency-table tests and Cox proportional-hazards
//! statistics.

pub mod special;

use crate::error::{Error, Result};
pub use special::{beta_inc, gamma_p, gamma_q, ln_gamma, normal_two_sided};

/// `P(F(df1, df2) > f)`. An infinite statistic has tail probability 0.
pub fn f_upper_tail(f: f64, df1: usize, df2: usize) -> f64 {
    assert!(
        df1 > 0 && df2 > 0,
        "F distribution needs positive degrees of freedom"
    );
    if f.is_nan() {
        return f64::NAN;
    }
    if f == f64::INFINITY {
        return 0.0;
    }
    if f <= 0.0 {
        return 1.0;
    }
    let (d1, d2) = (df1 as f64, df2 as f64);
    beta_inc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

/// `P(chi2(df) > x)`.
pub fn chi_square_upper_tail(x: f64, df: usize) -> f64 {
    assert!(df > 0, "chi-square needs positive degrees of freedom");
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Clusters by case status: one `[controls, cases]` row per cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: Vec<[u64; 2]>,
}

impl ContingencyTable {
    pub fn new(rows: Vec<[u64; 2]>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::DegenerateMargins);
        }
        if rows.iter().any(|r| r[0] + r[1] == 0) {
            return Err(Error::DegenerateMargins);
        }
        if rows.iter().all(|r| r[0] == 0) || rows.iter().all(|r| r[1] == 0) {
            return Err(Error::DegenerateMargins);
        }
        Ok(Self { rows })
    }

    /// Tabulates cluster labels (`0..k`) against binary case status.
    pub fn from_labels(labels: &[usize], case: &[u8]) -> Result<Self> {
        if labels.len() != case.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: case.len(),
            });
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut rows = vec![[0u64; 2]; k];
        for (&l, &c) in labels.iter().zip(case) {
            rows[l][usize::from(c > 0)] += 1;
        }
        Self::new(rows)
    }

    pub fn rows(&self) -> &[[u64; 2]] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContinuityCorrection {
    #[default]
    None,
    /// Yates: shrink each `|O - E|` by 0.5 (not below 0). Only applied to
    /// 2 x 2 tables.
    Yates,
}

/// Pearson chi-square test of independence. Returns `(statistic, p-value)`.
pub fn chi_square_test(table: &ContingencyTable, correction: ContinuityCorrection) -> (f64, f64) {
    let rows = table.rows();
    let shrink = if correction == ContinuityCorrection::Yates && rows.len() == 2 {
        0.5
    } else {
        0.0
    };
    let col = [
        rows.iter().map(|r| r[0]).sum::<u64>() as f64,
        rows.iter().map(|r| r[1]).sum::<u64>() as f64,
    ];
    let total = col[0] + col[1];
    let stat: f64 = rows
        .iter()
        .map(|r| {
            let rs = (r[0] + r[1]) as f64;
            (0..2)
                .map(|c| {
                    let e = rs * col[c] / total;
                    ((r[c] as f64 - e).abs() - shrink).max(0.0).powi(2) / e
                })
                .sum::<f64>()
        })
        .sum();
    (stat, chi_square_upper_tail(stat, rows.len() - 1))
}

/// Odds of being a case in each non-reference row relative to the
/// reference row, in row order.
pub fn odds_ratios(table: &ContingencyTable, reference_row: usize) -> Result<Vec<f64>> {
    let rows = table.rows();
    let reference = rows.get(reference_row).ok_or(Error::LabelOutOfRange {
        label: reference_row,
        k: rows.len(),
    })?;
    if reference[0] == 0 || reference[1] == 0 {
        return Err(Error::ZeroCell { row: reference_row });
    }
    let ref_odds = reference[1] as f64 / reference[0] as f64;
    rows.iter()
        .enumerate()
        .filter(|&(i, _)| i != reference_row)
        .map(|(i, r)| {
            if r[0] == 0 {
                Err(Error::ZeroCell { row: i })
            } else {
                Ok(r[1] as f64 / r[0] as f64 / ref_odds)
            }
        })
        .collect()
}

fn check_survival(n: usize, time: &[f64], event: &[bool]) -> Result<()> {
    if time.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: time.len(),
        });
    }
    if event.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: event.len(),
        });
    }
    if !event.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    Ok(())
}

/// Groups of tied times in decreasing order: `(indices at this time)`.
fn descending_time_groups(time: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..time.len()).collect();
    order.sort_by(|&a, &b| time[b].total_cmp(&time[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if time[g[0]] == time[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Score test statistic `U / sqrt(V)` of a single covariate in the Cox
/// partial likelihood at coefficient zero, Breslow ties. Risk-set variances
/// use the population convention. A constant covariate scores 0.
pub fn cox_univariate_score(x: &[f64], time: &[f64], event: &[bool]) -> Result<f64> {
    check_survival(x.len(), time, event)?;
    let center = x.iter().sum::<f64>() / x.len() as f64;
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    if lo == hi {
        return Ok(0.0);
    }
    let (mut count, mut s1, mut s2) = (0.0, 0.0, 0.0);
    let (mut u, mut v) = (0.0, 0.0);
    for group in descending_time_groups(time) {
        for &i in &group {
            let xi = x[i] - center;
            count += 1.0;
            s1 += xi;
            s2 += xi * xi;
        }
        let mean = s1 / count;
        let var = (s2 / count - mean * mean).max(0.0);
        for &i in group.iter().filter(|&&i| event[i]) {
            u += x[i] - center - mean;
            v += var;
        }
    }
    Ok(if v > 0.0 { u / v.sqrt() } else { 0.0 })
}

/// Proportional-hazards fit of a two-group indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxFit {
    pub beta: f64,
    pub se: f64,
    pub hazard_ratio: f64,
    /// Two-sided Wald p-value.
    pub pvalue: f64,
    pub iterations: usize,
}

/// Per distinct event time: (deaths in group 1, total deaths, at risk in
/// group 0, at risk in group 1).
fn binary_risk_sets(group: &[bool], time: &[f64], event: &[bool]) -> Vec<(f64, f64, f64, f64)> {
    let (mut r0, mut r1) = (0.0, 0.0);
    let mut out = Vec::new();
    for g in descending_time_groups(time) {
        for &i in &g {
            if group[i] {
                r1 += 1.0;
            } else {
                r0 += 1.0;
            }
        }
        let deaths: Vec<usize> = g.iter().copied().filter(|&i| event[i]).collect();
        if !deaths.is_empty() {
            let d1 = deaths.iter().filter(|&&i| group[i]).count() as f64;
            out.push((d1, deaths.len() as f64, r0, r1));
        }
    }
    out
}

fn binary_loglik(sets: &[(f64, f64, f64, f64)], beta: f64) -> (f64, f64, f64) {
    let eb = beta.exp();
    sets.iter()
        .fold((0.0, 0.0, 0.0), |(ll, u, info), &(d1, d, r0, r1)| {
            let denom = r0 + r1 * eb;
            let p = r1 * eb / denom;
            (
                ll + beta * d1 - d * denom.ln(),
                u + d1 - d * p,
                info + d * p * (1.0 - p),
            )
        })
}

/// Hazard ratio of `group == true` versus `group == false` from a
/// one-covariate Cox model (Breslow ties, damped Newton), with a Wald
/// p-value.
pub fn cox_binary_hr(group: &[bool], time: &[f64], event: &[bool]) -> Result<CoxFit> {
    check_survival(group.len(), time, event)?;
    let ones = group.iter().filter(|&&g| g).count();
    if ones == 0 || ones == group.len() {
        return Err(Error::DegenerateGroups(
            "both groups must be present".into(),
        ));
    }
    let sets = binary_risk_sets(group, time, event);
    // Monotone likelihood: every death term has the same sign for all beta.
    let up = sets.iter().all(|&(d1, d, _, r1)| d1 == d || r1 == 0.0);
    let down = sets.iter().all(|&(d1, _, r0, _)| d1 == 0.0 || r0 == 0.0);
    let flat = sets.iter().all(|&(_, _, r0, r1)| r0 == 0.0 || r1 == 0.0);
    if (up || down) && !flat {
        return Err(Error::Separation);
    }
    let mut beta = 0.0;
    let (mut ll, mut u, mut info) = binary_loglik(&sets, beta);
    let mut iterations = 0;
    for it in 1..=100 {
        iterations = it;
        if info <= 0.0 {
            return Err(Error::Separation);
        }
        let mut step = u / info;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = binary_loglik(&sets, beta + step);
            if cand.0 >= ll - 1e-12 * ll.abs() {
                accepted = Some(cand);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else { break };
        beta += step;
        (ll, u, info) = next;
        if step.abs() < 1e-12 {
            break;
        }
    }
    if !beta.is_finite() || info <= 0.0 {
        return Err(Error::Separation);
    }
    let se = 1.0 / info.sqrt();
    Ok(CoxFit {
        beta,
        se,
        hazard_ratio: beta.exp(),
        pvalue: normal_two_sided(beta / se),
        iterations,
    })
}
