//! End-to-end checks of the trained pipeline against independent oracles.

use edgc_core::corrector::{
    apply_corrector, train_corrector, ClusterSpace, SelectionRule, Thresholds, TrainConfig,
};
use edgc_core::{ClassLabel, LabeledDataset};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn planted_dataset(
    n: usize,
    x_count: usize,
    y_blobs: &[(Vec<f64>, f64, usize)],
    seed: u64,
) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let y_total: usize = y_blobs.iter().map(|b| b.2).sum();
    let mut features = Array2::zeros((x_count + y_total, n));
    let mut labels = Vec::with_capacity(x_count + y_total);
    for i in 0..x_count {
        for j in 0..n {
            features[[i, j]] = normal.sample(&mut rng);
        }
        labels.push(ClassLabel::Correct);
    }
    let mut row = x_count;
    for (center, spread, count) in y_blobs {
        for _ in 0..*count {
            for j in 0..n {
                features[[row, j]] = center[j] + spread * normal.sample(&mut rng);
            }
            labels.push(ClassLabel::Error);
            row += 1;
        }
    }
    LabeledDataset::new(features, labels).unwrap()
}

fn blob_center(n: usize, axis: usize, scale: f64) -> Vec<f64> {
    let mut c = vec![0.0; n];
    c[axis] = scale;
    c
}

/// Straight-line reimplementation of the projected deployment path, written
/// with bare loops and no shared helpers: transform, scan for the nearest
/// centroid, score against the routed discriminant.
fn naive_projected_apply(
    x: &[f64],
    centroid: &[f64],
    basis_rows: &Array2<f64>,
    inv_sqrt: &[f64],
    cluster_centroids: &Array2<f64>,
    discriminants: &Array2<f64>,
    thetas: &[f64],
) -> (bool, usize, f64) {
    let n = centroid.len();
    let m = basis_rows.nrows();
    let mut d = vec![0.0; n];
    for j in 0..n {
        d[j] = x[j] - centroid[j];
    }
    let mut xw = vec![0.0; m];
    for i in 0..m {
        let mut acc = 0.0;
        for j in 0..n {
            acc += basis_rows[[i, j]] * d[j];
        }
        xw[i] = acc * inv_sqrt[i];
    }
    let k = cluster_centroids.nrows();
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for c in 0..k {
        let mut acc = 0.0;
        for i in 0..m {
            let t = xw[i] - cluster_centroids[[c, i]];
            acc += t * t;
        }
        if acc < best_d {
            best_d = acc;
            best = c;
        }
    }
    let mut score = 0.0;
    for i in 0..m {
        score += discriminants[[best, i]] * xw[i];
    }
    let theta = if thetas.len() == 1 { thetas[0] } else { thetas[best] };
    (score < theta, best, score)
}

#[test]
fn deployment_matches_straight_line_reimplementation() {
    let n = 12;
    let ds = planted_dataset(
        n,
        500,
        &[
            (blob_center(n, 0, 3.0), 0.4, 80),
            (blob_center(n, 3, -3.0), 0.4, 80),
            (blob_center(n, 7, 2.5), 0.4, 80),
        ],
        301,
    );
    let model = train_corrector(
        &ds,
        &TrainConfig {
            clusters: 3,
            rule: SelectionRule::ExplicitRange { lo: 1, hi: n },
            thresholds: Thresholds::Single(-0.8),
            ..TrainConfig::default()
        },
    )
    .unwrap();

    let thetas = match &model.discriminants.thresholds {
        Thresholds::Single(t) => vec![*t],
        Thresholds::PerCluster(ts) => ts.clone(),
    };
    let basis = model.basis.components().to_owned();
    let inv_sqrt: Vec<f64> = model.whitening.inv_sqrt_eigenvalues.to_vec();
    let centroid: Vec<f64> = model.centering.centroid.to_vec();

    let mut rng = ChaCha8Rng::seed_from_u64(302);
    for _ in 0..1000 {
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let fast = apply_corrector(Array1::from(q.clone()).view(), &model).unwrap();
        let (naive_is_error, naive_cluster, naive_score) = naive_projected_apply(
            &q,
            &centroid,
            &basis,
            &inv_sqrt,
            &model.clusters.centroids,
            &model.discriminants.vectors,
            &thetas,
        );
        assert_eq!(fast.label == ClassLabel::Error, naive_is_error);
        assert_eq!(fast.cluster, naive_cluster);
        assert!((fast.score - naive_score).abs() < 1e-9);
    }
}

#[test]
fn whitened_training_covariance_is_identity_after_full_pipeline() {
    let n = 16;
    let ds = planted_dataset(n, 800, &[(blob_center(n, 1, 2.0), 0.3, 100)], 303);
    let model = train_corrector(
        &ds,
        &TrainConfig {
            rule: SelectionRule::ExplicitRange { lo: 1, hi: 10 },
            ..TrainConfig::default()
        },
    )
    .unwrap();

    // Recompute the whitened training matrix with plain loops.
    let x = ds.class_rows(ClassLabel::Correct);
    let m = model.basis.n_components();
    let rows = x.nrows();
    let mut xw = Array2::<f64>::zeros((rows, m));
    for r in 0..rows {
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..n {
                acc += model.basis.components()[[i, j]] * (x[[r, j]] - model.centering.centroid[j]);
            }
            xw[[r, i]] = acc * model.whitening.inv_sqrt_eigenvalues[i];
        }
    }
    let mut cov = Array2::<f64>::zeros((m, m));
    for r in 0..rows {
        for a in 0..m {
            for b in 0..m {
                cov[[a, b]] += xw[[r, a]] * xw[[r, b]];
            }
        }
    }
    cov /= rows as f64;
    for a in 0..m {
        for b in 0..m {
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!(
                (cov[[a, b]] - expect).abs() < 1e-6,
                "cov[{a},{b}] = {} off identity",
                cov[[a, b]]
            );
        }
    }
}

#[test]
fn discriminants_have_unit_norm_and_routing_is_sound_in_both_spaces() {
    let n = 10;
    for space in [ClusterSpace::Whitened, ClusterSpace::CenteredOriginal] {
        let ds = planted_dataset(
            n,
            400,
            &[
                (blob_center(n, 0, 3.5), 0.3, 60),
                (blob_center(n, 4, 3.5), 0.3, 60),
            ],
            304,
        );
        let model = train_corrector(
            &ds,
            &TrainConfig {
                clusters: 2,
                rule: SelectionRule::ExplicitRange { lo: 1, hi: n },
                space,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        for row in model.discriminants.vectors.rows() {
            assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-10);
        }
        let y = ds.class_rows(ClassLabel::Error);
        for (i, point) in y.rows().into_iter().enumerate() {
            let decision = apply_corrector(point, &model).unwrap();
            assert_eq!(
                decision.cluster, model.clusters.assignments[i],
                "space {space:?}: training error point {i} misrouted"
            );
        }
    }
}

#[test]
fn scores_are_bitwise_reproducible() {
    let n = 9;
    let ds = planted_dataset(n, 300, &[(blob_center(n, 2, 2.5), 0.4, 70)], 305);
    let model = train_corrector(&ds, &TrainConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(306);
    for _ in 0..200 {
        let q = Array1::from_shape_fn(n, |_| rng.random_range(-3.0..3.0));
        let a = apply_corrector(q.view(), &model).unwrap();
        let b = apply_corrector(q.view(), &model).unwrap();
        assert_eq!(a.score.to_bits(), b.score.to_bits());
        assert_eq!(a.label, b.label);
        assert_eq!(a.cluster, b.cluster);
    }
}

mod properties {
    use super::*;
    use edgc_core::fisher_separable;
    use edgc_core::metrics::sliding_window_score;
    use proptest::prelude::*;

    proptest! {
        /// The predicate must agree with the definition applied pair by pair.
        #[test]
        fn fisher_predicate_equals_naive_loop(
            x in prop::collection::vec(-2.0f64..2.0, 1..6),
            rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 1..6), 1..6),
            kappa in 0.0f64..=1.0,
        ) {
            let n = x.len();
            let same: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|mut r| {
                    r.resize(n, 0.0);
                    r
                })
                .collect();
            let ys = Array2::from_shape_vec(
                (same.len(), n),
                same.iter().flatten().copied().collect(),
            )
            .unwrap();
            let x = Array1::from(x);
            let naive = same.iter().all(|row| {
                let xx: f64 = x.iter().map(|v| v * v).sum();
                let xy: f64 = x.iter().zip(row).map(|(a, b)| a * b).sum();
                xx > kappa * xy
            });
            prop_assert_eq!(fisher_separable(x.view(), ys.view(), kappa), naive);
        }

        /// Raising θ can push a fixed query from correct to error, never back.
        #[test]
        fn threshold_monotonicity(
            q in prop::collection::vec(-2.0f64..2.0, 4),
            thetas in prop::collection::vec(-3.0f64..3.0, 2..12),
        ) {
            let ds = planted_dataset(4, 60, &[(vec![2.0, 0.0, 0.0, 0.0], 0.2, 20)], 307);
            let mut model = train_corrector(
                &ds,
                &TrainConfig {
                    rule: SelectionRule::ExplicitRange { lo: 1, hi: 4 },
                    ..TrainConfig::default()
                },
            )
            .unwrap();
            let q = Array1::from(q);
            let mut sorted = thetas;
            sorted.sort_by(f64::total_cmp);
            let mut was_error = false;
            for theta in sorted {
                model.discriminants.thresholds = Thresholds::Single(theta);
                let is_error =
                    apply_corrector(q.view(), &model).unwrap().label == ClassLabel::Error;
                prop_assert!(!was_error || is_error);
                was_error = is_error;
            }
        }

        /// Window means stay in [0,1] and move by at most 1/window per step.
        #[test]
        fn window_scores_bounded_and_smooth(
            bits in prop::collection::vec(any::<bool>(), 2..200),
            window_frac in 0.01f64..1.0,
        ) {
            let window = ((bits.len() as f64 * window_frac) as usize).clamp(1, bits.len());
            let out = sliding_window_score(&bits, window).unwrap();
            prop_assert_eq!(out.len(), bits.len() - window + 1);
            for &v in &out {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            for pair in out.windows(2) {
                prop_assert!((pair[1] - pair[0]).abs() <= 1.0 / window as f64 + 1e-15);
            }
        }
    }
}
