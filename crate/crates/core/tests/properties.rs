use proptest::prelude::*;

use sparsecluster::baselines::{nearest_centroid_predict, semi_supervised_clustering};
use sparsecluster::evaluation::{classify_layers, misclassification_count, MatchCriterion};
use sparsecluster::kmeans::weighted_kmeans_fit;
use sparsecluster::preweighted::{feature_anova, preweighted_sparse_clustering, PreweightOptions};
use sparsecluster::rng::{derive_seed, Stream};
use sparsecluster::stats::{
    chi_square_test, cox_binary_hr, cox_univariate_score, f_upper_tail, ContingencyTable,
    ContinuityCorrection,
};
use sparsecluster::supervised::{outcome_scores, top_features, FeatureScores, ScoreKind};
use sparsecluster::*;

fn noise(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut s = Stream::new(seed);
    DataMatrix::from_row_major((0..n * p).map(|_| s.normal()).collect(), n, p).unwrap()
}

/// Two groups of rows separated by `shift` on the first `informative` features.
fn planted(
    n: usize,
    p: usize,
    informative: usize,
    shift: f64,
    seed: u64,
) -> (DataMatrix, Vec<usize>) {
    let mut s = Stream::new(seed);
    let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let values = (0..n)
        .flat_map(|i| {
            let t = truth[i];
            (0..p)
                .map(|j| {
                    if j < informative {
                        shift * t as f64
                    } else {
                        0.0
                    }
                })
                .collect::<Vec<_>>()
        })
        .map(|m| m + s.normal())
        .collect();
    (DataMatrix::from_row_major(values, n, p).unwrap(), truth)
}

fn positive_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut s = Stream::new(seed);
    let mut a: Vec<f64> = (0..len).map(|_| 3.0 * s.uniform() - 0.5).collect();
    a[0] = a[0].abs() + 0.1;
    a
}

fn random_labels(n: usize, k: usize, seed: u64) -> ClusterAssignment {
    let mut s = Stream::new(seed);
    let mut labels: Vec<usize> = (0..n).map(|_| s.below(k)).collect();
    labels[..k].iter_mut().enumerate().for_each(|(i, l)| *l = i);
    ClusterAssignment::new(labels, k).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn standardize_is_idempotent(seed in any::<u64>(), n in 3usize..20, p in 1usize..8) {
        let once = standardize_features(&noise(n, p, seed)).unwrap();
        let twice = standardize_features(&once).unwrap();
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn standardize_commutes_with_row_permutation(seed in any::<u64>(), n in 3usize..20, p in 1usize..8) {
        let x = noise(n, p, seed);
        let order: Vec<usize> = (0..n).rev().collect();
        let a = standardize_features(&x).unwrap().permute_rows(&order).unwrap();
        let b = standardize_features(&x.permute_rows(&order).unwrap()).unwrap();
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling_weights_keeps_the_assignment(seed in any::<u64>(), c in prop::sample::select(vec![0.25, 0.37, 3.0, 16.0])) {
        let x = noise(15, 4, seed);
        let w = WeightVector::new(positive_vec(4, seed ^ 1).iter().map(|v| v.abs() + 0.01).collect()).unwrap();
        let scaled = WeightVector::new(w.as_slice().iter().map(|v| v * c).collect()).unwrap();
        let cfg = KMeansConfig::new(3).with_seed(seed);
        prop_assert_eq!(weighted_kmeans(&x, &w, &cfg).unwrap(), weighted_kmeans(&x, &scaled, &cfg).unwrap());
    }

    #[test]
    fn best_restart_dominates_and_lloyd_never_worsens(seed in any::<u64>(), k in 2usize..5) {
        let x = noise(20, 3, seed);
        let fit = weighted_kmeans_fit(&x, &WeightVector::uniform(3), &KMeansConfig::new(k).with_seed(seed), None).unwrap();
        prop_assert!(fit.restart_objectives.iter().all(|&o| fit.objective >= o));
        for trace in &fit.restart_traces {
            prop_assert!(trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn bcss_matches_double_sum(seed in any::<u64>(), k in 2usize..4) {
        let x = noise(6, 4, seed);
        let c = random_labels(6, k, seed ^ 7);
        let a = per_feature_bcss(&x, &c).unwrap();
        for j in 0..4 {
            let d = |i: usize, l: usize| (x.get(i, j) - x.get(l, j)).powi(2);
            let total: f64 = (0..6).flat_map(|i| (0..6).map(move |l| (i, l))).map(|(i, l)| d(i, l)).sum::<f64>() / 6.0;
            let within: f64 = (0..k)
                .map(|g| {
                    let members: Vec<usize> = (0..6).filter(|&i| c.labels()[i] == g).collect();
                    let s: f64 = members.iter().flat_map(|&i| members.iter().map(move |&l| d(i, l))).sum();
                    s / members.len() as f64
                })
                .sum();
            prop_assert!((a[j] - (total - within)).abs() < 1e-8);
        }
    }

    #[test]
    fn weight_update_never_lowers_objective(seed in any::<u64>(), p in 2usize..12, frac in 0.05f64..1.0) {
        let x = noise(10, p, seed);
        let c = random_labels(10, 2, seed ^ 3);
        let s = 1.0 + frac * ((p as f64).sqrt() - 1.0);
        // a feasible starting point: uniform on floor(s^2) features
        let m = ((s * s).floor() as usize).clamp(1, p);
        let old = WeightVector::indicator(&(0..p).map(|j| j < m).collect::<Vec<_>>()).unwrap();
        let new = update_weights(&per_feature_bcss(&x, &c).unwrap(), s).unwrap();
        prop_assert!(weighted_objective(&x, &new, &c).unwrap() >= weighted_objective(&x, &old, &c).unwrap() - 1e-9);
    }

    #[test]
    fn weight_update_invariants(seed in any::<u64>(), p in 2usize..20, frac in 0.01f64..1.0, c in 1e-3f64..1e3) {
        let a = positive_vec(p, seed);
        let s = 1.0 + frac * ((p as f64).sqrt() - 1.0);
        let w = update_weights(&a, s).unwrap();
        prop_assert!((w.l2_norm() - 1.0).abs() < 1e-9);
        prop_assert!(w.l1_norm() <= s + 1e-6);
        prop_assert!(w.as_slice().iter().all(|&v| v >= 0.0));
        let scaled: Vec<f64> = a.iter().map(|v| v * c).collect();
        let ws = update_weights(&scaled, s).unwrap();
        for (u, v) in w.as_slice().iter().zip(ws.as_slice()) {
            prop_assert!((u - v).abs() < 1e-9);
        }
        let tighter = update_weights(&a, 1.0 + 0.5 * (s - 1.0)).unwrap();
        prop_assert!(tighter.nonzero_count() <= w.nonzero_count());
    }

    #[test]
    fn sparse_weights_follow_column_permutation(seed in any::<u64>()) {
        let (x, _) = planted(16, 6, 2, 4.0, seed);
        let order = [3usize, 5, 0, 2, 4, 1];
        let permuted = x.select_features(&order).unwrap();
        let cfg = SparseConfig::new(2, 6).with_seed(seed);
        let a = sparse_kmeans(&x, &cfg, None).unwrap();
        let b = sparse_kmeans(&permuted, &cfg, None).unwrap();
        prop_assert_eq!(&a.assignment, &b.assignment);
        for (pos, &j) in order.iter().enumerate() {
            prop_assert!((a.weights.as_slice()[j] - b.weights.as_slice()[pos]).abs() < 1e-9);
        }
    }

    #[test]
    fn screened_features_never_return(seed in any::<u64>()) {
        let (x, _) = planted(12, 20, 6, 5.0, seed);
        let cfg = SparseConfig::new(2, 20).with_seed(seed);
        let opts = PreweightOptions::default().with_depth(3).with_alpha(0.01);
        if let Ok(r) = preweighted_sparse_clustering(&x, &cfg, &opts) {
            for (layer, mask) in r.layers.iter().zip(&r.masks) {
                for (w, &ok) in layer.weights.as_slice().iter().zip(mask) {
                    prop_assert!(ok || *w == 0.0);
                }
            }
            for pair in r.masks.windows(2) {
                prop_assert!(pair[1].iter().zip(&pair[0]).all(|(&deep, &shallow)| !deep || shallow));
            }
        }
    }

    #[test]
    fn tiny_alpha_reruns_sparse_clustering(seed in any::<u64>()) {
        let x = noise(12, 8, seed);
        let cfg = SparseConfig::new(2, 8).with_seed(seed);
        let r = preweighted_sparse_clustering(&x, &cfg, &PreweightOptions::default().with_alpha(f64::MIN_POSITIVE)).unwrap();
        let rerun = sparse_kmeans(&x, &cfg.clone().with_seed(derive_seed(seed, &[0x1a7e, 2])), None).unwrap();
        prop_assert_eq!(&r.layers[1], &rerun);
    }

    #[test]
    fn anova_with_two_groups_is_squared_t(seed in any::<u64>()) {
        let x = noise(10, 3, seed);
        let c = random_labels(10, 2, seed ^ 5);
        let f = feature_anova(&x, &c).unwrap().f;
        let y = Outcome::Binary(c.labels().iter().map(|&l| l as u8).collect());
        let t = sparsecluster::supervised::outcome_scores_pooled(&x, &y).unwrap().t;
        for (fj, tj) in f.iter().zip(&t) {
            prop_assert!((fj - tj * tj).abs() < 1e-8 * fj.max(1.0));
        }
    }

    #[test]
    fn flipping_outcome_coding_changes_nothing(seed in any::<u64>()) {
        let (x, truth) = planted(16, 9, 3, 3.0, seed);
        let y: Vec<u8> = truth.iter().map(|&t| t as u8).collect();
        let flipped: Vec<u8> = y.iter().map(|v| 1 - v).collect();
        let cfg = SparseConfig::new(2, 9).with_seed(seed);
        let a = supervised_sparse_clustering(&x, &Outcome::Binary(y), &cfg, Some(3)).unwrap();
        let b = supervised_sparse_clustering(&x, &Outcome::Binary(flipped), &cfg, Some(3)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn top_features_match_full_sort(seed in any::<u64>(), p in 1usize..30, m_frac in 0.0f64..1.0) {
        let mut s = Stream::new(seed);
        // coarse values force ties
        let t: Vec<f64> = (0..p).map(|_| (s.below(7) as f64 - 3.0) * 0.5).collect();
        let m = 1 + ((p - 1) as f64 * m_frac) as usize;
        let mut sorted: Vec<f64> = t.iter().map(|v| v.abs()).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let cutoff = sorted[m - 1];
        let expected: Vec<usize> = (0..p).filter(|&j| t[j].abs() >= cutoff).collect();
        prop_assert_eq!(top_features(&FeatureScores { t, kind: ScoreKind::WelchT }, m).unwrap(), expected);
    }

    #[test]
    fn all_features_selected_is_plain_sparse(seed in any::<u64>()) {
        let (x, truth) = planted(14, 6, 2, 5.0, seed);
        let y = Outcome::Binary(truth.iter().map(|&t| t as u8).collect());
        let cfg = SparseConfig::new(2, 6).with_seed(seed);
        prop_assert_eq!(
            supervised_sparse_clustering(&x, &y, &cfg, Some(6)).unwrap(),
            sparse_kmeans(&x, &cfg, None).unwrap()
        );
        let km = KMeansConfig::new(2).with_seed(seed);
        prop_assert_eq!(semi_supervised_clustering(&x, &y, 6, &km).unwrap(), kmeans(&x, &km).unwrap());
    }

    #[test]
    fn converged_lloyd_is_nearest_centroid_consistent(seed in any::<u64>(), k in 2usize..4) {
        let x = noise(18, 4, seed);
        let w = WeightVector::new(positive_vec(4, seed ^ 9).iter().map(|v| v.abs() + 0.05).collect()).unwrap();
        let mut cfg = KMeansConfig::new(k).with_seed(seed);
        cfg.tolerance = f64::MIN_POSITIVE;
        cfg.max_iterations = 1000;
        let assignment = weighted_kmeans(&x, &w, &cfg).unwrap();
        let trained = SparseClusteringResult {
            weights: w,
            assignment: assignment.clone(),
            objective: 0.0,
            iterations: 1,
            weight_change_trace: vec![0.0],
            converged: true,
        };
        prop_assert_eq!(nearest_centroid_predict(&x, &trained, &x).unwrap(), assignment.labels().to_vec());
    }

    #[test]
    fn f_tail_is_monotone(df1 in 1usize..30, df2 in 1usize..200, a in 0.0f64..20.0, b in 0.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(f_upper_tail(hi, df1, df2) <= f_upper_tail(lo, df1, df2) + 1e-15);
    }

    #[test]
    fn chi_square_is_row_order_invariant(rows in prop::collection::vec((1u64..500, 1u64..500), 2..6)) {
        let table: Vec<[u64; 2]> = rows.iter().map(|&(a, b)| [a, b]).collect();
        let mut reversed = table.clone();
        reversed.reverse();
        let a = chi_square_test(&ContingencyTable::new(table).unwrap(), ContinuityCorrection::None);
        let b = chi_square_test(&ContingencyTable::new(reversed).unwrap(), ContinuityCorrection::None);
        prop_assert!((a.0 - b.0).abs() <= 1e-9 * a.0.max(1.0));
        prop_assert!((0.0..=1.0).contains(&a.1));
    }

    #[test]
    fn cox_score_ignores_monotone_time_transforms(seed in any::<u64>()) {
        let mut s = Stream::new(seed);
        let n = 25;
        let x: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let time: Vec<f64> = (0..n).map(|_| (1 + s.below(10)) as f64).collect();
        let event: Vec<bool> = (0..n).map(|i| i == 0 || s.uniform() < 0.7).collect();
        let warped: Vec<f64> = time.iter().map(|t| t.powi(3) + 5.0).collect();
        prop_assert_eq!(
            cox_univariate_score(&x, &time, &event).unwrap(),
            cox_univariate_score(&x, &warped, &event).unwrap()
        );
    }

    #[test]
    fn cox_hr_swap_is_reciprocal(seed in any::<u64>()) {
        let mut s = Stream::new(seed);
        let n = 60;
        let group: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let time: Vec<f64> = group.iter().map(|&g| -s.uniform().ln() / if g { 1.5 } else { 1.0 }).collect();
        let event: Vec<bool> = (0..n).map(|_| s.uniform() < 0.8).collect();
        let swapped: Vec<bool> = group.iter().map(|g| !g).collect();
        if let (Ok(a), Ok(b)) = (cox_binary_hr(&group, &time, &event), cox_binary_hr(&swapped, &time, &event)) {
            prop_assert!((a.hazard_ratio * b.hazard_ratio - 1.0).abs() < 1e-8);
            prop_assert!((a.pvalue - b.pvalue).abs() < 1e-12);
        }
    }

    #[test]
    fn misclassification_is_symmetric_and_label_free(seed in any::<u64>(), n in 2usize..40, k in 2usize..5) {
        let mut s = Stream::new(seed);
        let a: Vec<usize> = (0..n).map(|_| s.below(k)).collect();
        let b: Vec<usize> = (0..n).map(|_| s.below(k)).collect();
        let relabeled: Vec<usize> = a.iter().map(|&l| (l + 1) % k + 10).collect();
        let m = misclassification_count(&a, &b).unwrap();
        prop_assert_eq!(m, misclassification_count(&b, &a).unwrap());
        prop_assert_eq!(m, misclassification_count(&relabeled, &b).unwrap());
        if k == 2 {
            prop_assert!(m <= n / 2);
        }
    }

    #[test]
    fn classification_is_label_free(seed in any::<u64>()) {
        let mut s = Stream::new(seed);
        let e1 = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let e2 = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let pick = |s: &mut Stream| -> Vec<usize> {
            match s.below(3) {
                0 => e1.to_vec(),
                1 => e2.to_vec(),
                _ => (0..12).map(|_| s.below(2)).collect(),
            }
        };
        let (a, b) = (pick(&mut s), pick(&mut s));
        let flip = |v: &[usize]| v.iter().map(|l| 1 - l).collect::<Vec<_>>();
        let base = classify_layers(&a, &b, &e1, &e2, MatchCriterion::Exact).unwrap();
        prop_assert_eq!(base, classify_layers(&flip(&a), &b, &flip(&e1), &e2, MatchCriterion::Exact).unwrap());
        prop_assert_eq!(base, classify_layers(&a, &flip(&b), &e1, &flip(&e2), MatchCriterion::Exact).unwrap());
    }
}

#[test]
fn welch_scores_are_sign_symmetric() {
    let (x, truth) = planted(12, 5, 2, 2.0, 4);
    let y: Vec<u8> = truth.iter().map(|&t| t as u8).collect();
    let a = outcome_scores(&x, &Outcome::Binary(y.clone())).unwrap().t;
    let b = outcome_scores(&x, &Outcome::Binary(y.iter().map(|v| 1 - v).collect()))
        .unwrap()
        .t;
    assert!(a.iter().zip(&b).all(|(u, v)| (u + v).abs() < 1e-12));
}
