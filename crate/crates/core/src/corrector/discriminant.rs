//! Training step 6: regularized Fisher discriminants, one per cluster.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::cholesky::{FactorizeC, SolveC, UPLO};

use crate::error::{Error, Result};
use crate::linalg::covariance;
use crate::parallel::map_indexed;

use super::kmeans::ClusterPartition;

/// Decision thresholds: one global θ or one θ per cluster.
#[derive(Debug, Clone, PartialEq)]
pub enum Thresholds {
    Single(f64),
    PerCluster(Vec<f64>),
}

impl Thresholds {
    /// θ for cluster `i`.
    pub fn for_cluster(&self, i: usize) -> f64 {
        match self {
            Thresholds::Single(t) => *t,
            Thresholds::PerCluster(ts) => ts[i],
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            Thresholds::Single(t) if t.is_finite() => Ok(()),
            Thresholds::PerCluster(ts) if ts.len() == k && ts.iter().all(|t| t.is_finite()) => {
                Ok(())
            }
            Thresholds::PerCluster(ts) if ts.len() != k => Err(Error::BadThresholdCount {
                k,
                got: ts.len(),
            }),
            _ => Err(Error::param("threshold", "thresholds must be finite")),
        }
    }
}

impl Default for Thresholds {
    /// The Fisher sign boundary; calibrate externally (e.g. by ROC sweep).
    fn default() -> Self {
        Thresholds::Single(0.0)
    }
}

/// Unit discriminant directions w₁…w_k with their thresholds.
#[derive(Debug, Clone)]
pub struct DiscriminantSet {
    /// k×m matrix of unit rows.
    pub vectors: Array2<f64>,
    pub thresholds: Thresholds,
    /// Relative ridge scale used during fitting: each cluster's combined
    /// covariance S gets `ridge · trace(S)/m · I` added before inversion.
    /// Zero means no regularization. NaN on models loaded from disk (the
    /// file format does not carry it).
    pub ridge: f64,
}

/// Default relative ridge: ε = 1e-6 · trace(S)/m.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Fits w_i = −(Cov(X_w) + Cov(Y_i) + εI)⁻¹ ȳ_i, normalized to unit length.
///
/// `x_w` are the whitened correct-class rows; `y_w` the whitened error-class
/// rows grouped by `partition.assignments`. Cluster means are recomputed in
/// whitened coordinates, which also covers partitions built in the original
/// space. Singleton clusters contribute zero covariance. The ridge
/// is relative: ε = ridge · trace(S)/m. With `ridge = 0`, a singular combined
/// covariance is an error asking for a nonzero ridge.
pub fn fit_discriminants(
    x_w: ArrayView2<'_, f64>,
    y_w: ArrayView2<'_, f64>,
    partition: &ClusterPartition,
    ridge: f64,
    thresholds: Thresholds,
) -> Result<DiscriminantSet> {
    let k = partition.k();
    let m = x_w.ncols();
    if y_w.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: y_w.ncols(),
        });
    }
    if partition.assignments.len() != y_w.nrows() {
        return Err(Error::DimensionMismatch {
            expected: y_w.nrows(),
            got: partition.assignments.len(),
        });
    }
    if !(ridge >= 0.0) {
        return Err(Error::param("ridge", "must be a nonnegative real"));
    }
    thresholds.validate(k)?;

    let cov_x = covariance(x_w);

    // Clusters are independent; fit them in parallel, collect in order.
    let fitted: Vec<Result<Array1<f64>>> = map_indexed(k, |c| {
        let members: Vec<usize> = partition
            .assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == c)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            return Err(Error::DegenerateClustering { k });
        }
        let cluster = y_w.select(ndarray::Axis(0), &members);
        let mean = crate::linalg::row_mean(cluster.view());
        let mut combined = &cov_x + &covariance(cluster.view());
        if ridge > 0.0 {
            let trace: f64 = combined.diag().sum();
            let eps = ridge * trace / m as f64;
            for i in 0..m {
                combined[[i, i]] += eps;
            }
        }
        let solved = combined
            .factorizec(UPLO::Lower)
            .and_then(|f| f.solvec(&mean))
            .map_err(|_| Error::SingularCovariance)?;
        let norm = solved.dot(&solved).sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::ZeroCentroid(c));
        }
        Ok(-&solved / norm)
    });

    let mut vectors = Array2::zeros((k, m));
    for (c, row) in fitted.into_iter().enumerate() {
        vectors.row_mut(c).assign(&row?);
    }
    Ok(DiscriminantSet {
        vectors,
        thresholds,
        ridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrector::kmeans::ClusterSpace;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn singleton_partition(centroids: Array2<f64>, members: usize) -> ClusterPartition {
        ClusterPartition {
            centroids,
            assignments: vec![0; members],
            space: ClusterSpace::Whitened,
        }
    }

    /// Identity X covariance plus a singleton cluster reduces step 6 to the
    /// normalized negative centroid.
    #[test]
    fn identity_covariance_gives_negative_unit_centroid() {
        // Four points with exact population covariance I₂.
        let x_w = array![
            [2.0_f64.sqrt(), 0.0],
            [-(2.0_f64.sqrt()), 0.0],
            [0.0, 2.0_f64.sqrt()],
            [0.0, -(2.0_f64.sqrt())]
        ];
        let y_w = array![[0.0, 2.0]];
        let part = singleton_partition(array![[0.0, 2.0]], 1);
        let d = fit_discriminants(x_w.view(), y_w.view(), &part, 0.0, Thresholds::default())
            .unwrap();
        assert!((d.vectors[[0, 0]] - 0.0).abs() < 1e-12);
        assert!((d.vectors[[0, 1]] + 1.0).abs() < 1e-12);
    }

    /// Hand-invertible diagonal sum: S = diag(1,4), ȳ = (1,2) →
    /// unnormalized −(1, 1/2), normalized −(2,1)/√5.
    #[test]
    fn diagonal_sum_solved_by_hand() {
        let x_w = array![[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.0, -2.0]];
        // Cluster with mean (1,2) and population covariance diag(1/2, 2).
        let y_w = array![[2.0, 2.0], [0.0, 2.0], [1.0, 4.0], [1.0, 0.0]];
        let part = singleton_partition(array![[1.0, 2.0]], 4);
        let d = fit_discriminants(x_w.view(), y_w.view(), &part, 0.0, Thresholds::default())
            .unwrap();
        let sqrt5 = 5.0_f64.sqrt();
        assert!((d.vectors[[0, 0]] + 2.0 / sqrt5).abs() < 1e-12);
        assert!((d.vectors[[0, 1]] + 1.0 / sqrt5).abs() < 1e-12);
    }

    /// Independent oracle: explicit Gauss-Jordan inverse, then w = −S⁻¹ȳ.
    #[test]
    fn matches_dense_inverse_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..20 {
            let m = 4;
            let x_w = Array2::from_shape_fn((60, m), |_| rng.random_range(-1.0..1.0));
            let y_rows = Array2::from_shape_fn((15, m), |_| rng.random_range(0.5..1.5));
            let part = singleton_partition(
                crate::linalg::row_mean(y_rows.view()).insert_axis(ndarray::Axis(0)),
                15,
            );
            let ridge = if trial % 2 == 0 { 0.0 } else { 1e-6 };
            let d = fit_discriminants(x_w.view(), y_rows.view(), &part, ridge, Thresholds::default())
                .unwrap();

            // Oracle path.
            let mut s = covariance(x_w.view()) + covariance(y_rows.view());
            if ridge > 0.0 {
                let trace: f64 = s.diag().sum();
                for i in 0..m {
                    s[[i, i]] += ridge * trace / m as f64;
                }
            }
            let inv = gauss_jordan_inverse(&s);
            let mean = crate::linalg::row_mean(y_rows.view());
            let mut w = Array1::<f64>::zeros(m);
            for i in 0..m {
                for j in 0..m {
                    w[i] -= inv[[i, j]] * mean[j];
                }
            }
            let norm = w.dot(&w).sqrt();
            w /= norm;
            for (a, b) in d.vectors.row(0).iter().zip(w.iter()) {
                assert!((a - b).abs() < 1e-8, "trial {trial}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn singular_without_ridge_errors_and_ridge_rescues() {
        // All X mass on the first axis, singleton Y: combined covariance is
        // singular in the second coordinate.
        let x_w = array![[1.0, 0.0], [-1.0, 0.0]];
        let y_w = array![[0.5, 0.5]];
        let part = singleton_partition(array![[0.5, 0.5]], 1);
        let err = fit_discriminants(x_w.view(), y_w.view(), &part, 0.0, Thresholds::default());
        assert!(matches!(err, Err(Error::SingularCovariance)));
        let ok = fit_discriminants(
            x_w.view(),
            y_w.view(),
            &part,
            DEFAULT_RIDGE,
            Thresholds::default(),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn unit_norm_and_threshold_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let x_w = Array2::from_shape_fn((40, 3), |_| rng.random_range(-1.0..1.0));
        let y_w = Array2::from_shape_fn((10, 3), |_| rng.random_range(1.0..2.0));
        let assignments: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let part = ClusterPartition {
            centroids: Array2::zeros((2, 3)),
            assignments,
            space: ClusterSpace::Whitened,
        };
        let d = fit_discriminants(
            x_w.view(),
            y_w.view(),
            &part,
            DEFAULT_RIDGE,
            Thresholds::PerCluster(vec![-1.0, 0.5]),
        )
        .unwrap();
        for row in d.vectors.rows() {
            assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-10);
        }
        let bad = fit_discriminants(
            x_w.view(),
            y_w.view(),
            &part,
            DEFAULT_RIDGE,
            Thresholds::PerCluster(vec![0.0; 3]),
        );
        assert!(matches!(bad, Err(Error::BadThresholdCount { k: 2, got: 3 })));
    }

    fn gauss_jordan_inverse(a: &Array2<f64>) -> Array2<f64> {
        let n = a.nrows();
        let mut aug = Array2::zeros((n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                aug[[i, j]] = a[[i, j]];
            }
            aug[[i, n + i]] = 1.0;
        }
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if aug[[r, col]].abs() > aug[[pivot, col]].abs() {
                    pivot = r;
                }
            }
            for j in 0..2 * n {
                let tmp = aug[[col, j]];
                aug[[col, j]] = aug[[pivot, j]];
                aug[[pivot, j]] = tmp;
            }
            let p = aug[[col, col]];
            for j in 0..2 * n {
                aug[[col, j]] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[[r, col]];
                    for j in 0..2 * n {
                        aug[[r, j]] -= f * aug[[col, j]];
                    }
                }
            }
        }
        let mut inv = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                inv[[i, j]] = aug[[i, n + j]];
            }
        }
        inv
    }
}
