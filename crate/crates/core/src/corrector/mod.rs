//! Training pipeline and deployment of the 1-nn routed Fisher corrector.
//!
//! Training composes six steps: centroid removal, principal components,
//! component selection, whitening, clustering of the error set, and one
//! regularized Fisher discriminant per cluster. Deployment routes a query to
//! the cluster with the nearest centroid and consults only that cluster's
//! discriminant: the query is relabeled as an error iff its score falls
//! strictly below the cluster threshold.
//!
//! Clustering can run in whitened coordinates (the default) or on the
//! centroid-shifted original coordinates before any dimensionality reduction.
//! The latter enables the fused deployment path, which never projects the
//! query: the discriminants are folded back into full-dimensional vectors
//! w*_i = Hᵀ W w_i at training time, so a query costs one nearest-centroid
//! scan plus one inner product. That pays off when the number of retained
//! components exceeds the cluster count.

mod centering;
mod discriminant;
mod kmeans;
mod pca;
mod select;
mod whiten;

pub use centering::{fit_centering, CenteringStats};
pub use discriminant::{fit_discriminants, DiscriminantSet, Thresholds, DEFAULT_RIDGE};
pub use kmeans::{cluster_errors, cluster_in_space, ClusterPartition, ClusterSpace};
pub use pca::{fit_pca, project, EigenDecomposition, ProjectionBasis, EIGENVALUE_FLOOR};
pub use select::{select_components, SelectionRule};
pub use whiten::{whiten, WhiteningWeights};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::dataset::{ClassLabel, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite_vec, nearest_row};
use crate::parallel::map_indexed;

/// Everything training produces; immutable once built, so concurrent
/// deployment needs no synchronization.
#[derive(Debug, Clone)]
pub struct CorrectorModel {
    pub centering: CenteringStats,
    pub basis: ProjectionBasis,
    pub whitening: WhiteningWeights,
    pub clusters: ClusterPartition,
    pub discriminants: DiscriminantSet,
    /// Precomputed w*_i = Hᵀ W w_i, present iff clustering ran in the
    /// centered original space.
    pub fused_vectors: Option<Array2<f64>>,
}

/// Training parameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub clusters: usize,
    pub rule: SelectionRule,
    /// Relative ridge scale for step 6; see [`fit_discriminants`].
    pub ridge: f64,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub space: ClusterSpace,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            clusters: 1,
            rule: SelectionRule::Kaiser,
            ridge: DEFAULT_RIDGE,
            thresholds: Thresholds::default(),
            seed: 0,
            space: ClusterSpace::Whitened,
        }
    }
}

/// One deployment decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub label: ClassLabel,
    /// Cluster chosen by the 1-nn routing step.
    pub cluster: usize,
    /// Inner product of the routed discriminant with the transformed query.
    pub score: f64,
}

impl CorrectorModel {
    /// Assembles and validates a model from its parts.
    ///
    /// Checks mutual dimension consistency, whitening weights against the
    /// basis eigenvalues, unit discriminant norms, threshold count, and —
    /// when fused vectors are present — that each equals Hᵀ W w_i.
    pub fn from_parts(
        centering: CenteringStats,
        basis: ProjectionBasis,
        whitening: WhiteningWeights,
        clusters: ClusterPartition,
        discriminants: DiscriminantSet,
        fused_vectors: Option<Array2<f64>>,
    ) -> Result<Self> {
        let n = basis.n_features();
        let m = basis.n_components();
        if centering.centroid.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: centering.centroid.len(),
            });
        }
        ensure_finite_vec(centering.centroid.view())?;
        if whitening.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: whitening.len(),
            });
        }
        for (w, l) in whitening
            .inv_sqrt_eigenvalues
            .iter()
            .zip(basis.eigenvalues().iter())
        {
            if (w * l.sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::param(
                    "whitening",
                    "weights are not 1/√λ of the basis eigenvalues",
                ));
            }
        }
        let k = clusters.k();
        if k == 0 {
            return Err(Error::InvalidClusterCount { k, points: 0 });
        }
        let centroid_dim = match clusters.space {
            ClusterSpace::Whitened => m,
            ClusterSpace::CenteredOriginal => n,
        };
        if clusters.centroids.ncols() != centroid_dim {
            return Err(Error::DimensionMismatch {
                expected: centroid_dim,
                got: clusters.centroids.ncols(),
            });
        }
        crate::linalg::ensure_finite(clusters.centroids.view())?;
        if discriminants.vectors.nrows() != k || discriminants.vectors.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: k * m,
                got: discriminants.vectors.len(),
            });
        }
        for row in discriminants.vectors.rows() {
            if (row.dot(&row).sqrt() - 1.0).abs() > 1e-10 {
                return Err(Error::param("discriminants", "rows must have unit norm"));
            }
        }
        discriminants.thresholds.validate(k)?;
        if let Some(fused) = &fused_vectors {
            if clusters.space != ClusterSpace::CenteredOriginal {
                return Err(Error::param(
                    "fused_vectors",
                    "fused vectors require centered-original clustering",
                ));
            }
            if fused.nrows() != k || fused.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: k * n,
                    got: fused.len(),
                });
            }
            let expected = fuse_discriminants(&basis, &whitening, &discriminants.vectors);
            let scale = expected
                .iter()
                .fold(1.0_f64, |acc, v| acc.max(v.abs()));
            for (a, b) in fused.iter().zip(expected.iter()) {
                if (a - b).abs() > 1e-10 * scale {
                    return Err(Error::param(
                        "fused_vectors",
                        "do not match Hᵀ W w_i for the model's basis",
                    ));
                }
            }
        }
        Ok(CorrectorModel {
            centering,
            basis,
            whitening,
            clusters,
            discriminants,
            fused_vectors,
        })
    }

    pub fn n_features(&self) -> usize {
        self.basis.n_features()
    }

    pub fn n_components(&self) -> usize {
        self.basis.n_components()
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.k()
    }

    /// W · H · d for a centroid-shifted query d.
    fn transform(&self, d: &Array1<f64>) -> Array1<f64> {
        let mut projected = self.basis.components().dot(d);
        projected *= &self.whitening.inv_sqrt_eigenvalues;
        projected
    }
}

/// Folds projection and whitening into each discriminant: w*_i = Hᵀ W w_i.
/// The fused vectors live in the original n-dimensional coordinates.
pub fn fuse_discriminants(
    basis: &ProjectionBasis,
    whitening: &WhiteningWeights,
    vectors: &Array2<f64>,
) -> Array2<f64> {
    // w* = Hᵀ (W w) per row.
    let weighted = vectors * &whitening.inv_sqrt_eigenvalues.view().insert_axis(ndarray::Axis(0));
    weighted.dot(&basis.components())
}

/// Trains the full pipeline.
///
/// With whitened-space clustering the six steps run in their natural order.
/// With centered-original clustering, the error set is partitioned before
/// dimensionality reduction, the discriminants are still fitted in whitened
/// coordinates, and the fused vectors are precomputed. Training cost is
/// linear in the number of samples for fixed (n, m, k).
pub fn train_corrector(dataset: &LabeledDataset, config: &TrainConfig) -> Result<CorrectorModel> {
    let (_, y_count) = dataset.class_counts();
    if y_count == 0 {
        return Err(Error::EmptyClass("error-class"));
    }

    let (centering, x_centered, y_shifted) = fit_centering(dataset)?;

    let cluster_first = match config.space {
        ClusterSpace::Whitened => None,
        ClusterSpace::CenteredOriginal => Some(cluster_in_space(
            y_shifted.view(),
            config.clusters,
            config.seed,
            ClusterSpace::CenteredOriginal,
        )?),
    };

    let decomposition = fit_pca(x_centered.view())?;
    let retained = select_components(decomposition.eigenvalues.view(), &config.rule)?;
    let basis = ProjectionBasis::from_decomposition(
        &decomposition,
        &retained,
        Some(config.rule.clone()),
    )?;
    drop(decomposition);

    let whitening = WhiteningWeights::from_eigenvalues(basis.eigenvalues())?;
    let x_w = whiten(project(x_centered.view(), &basis)?.view(), &whitening)?;
    drop(x_centered);
    let y_w = whiten(project(y_shifted.view(), &basis)?.view(), &whitening)?;

    let clusters = match cluster_first {
        Some(partition) => partition,
        None => cluster_errors(y_w.view(), config.clusters, config.seed)?,
    };

    let discriminants = fit_discriminants(
        x_w.view(),
        y_w.view(),
        &clusters,
        config.ridge,
        config.thresholds.clone(),
    )?;

    let fused_vectors = match clusters.space {
        ClusterSpace::CenteredOriginal => Some(fuse_discriminants(
            &basis,
            &whitening,
            &discriminants.vectors,
        )),
        ClusterSpace::Whitened => None,
    };

    CorrectorModel::from_parts(
        centering,
        basis,
        whitening,
        clusters,
        discriminants,
        fused_vectors,
    )
}

/// Deployment via projection: transform the query, route it to the nearest
/// cluster centroid, and compare the routed discriminant's score against the
/// threshold. The query is an error iff score < θ (strictly).
///
/// Routing distances are measured in the space the clustering ran in, so
/// training-set error points always route to their own cluster.
pub fn apply_corrector(x: ArrayView1<'_, f64>, model: &CorrectorModel) -> Result<Decision> {
    let d = shifted_query(x, model)?;
    let (cluster, score) = match model.clusters.space {
        ClusterSpace::Whitened => {
            let x_w = model.transform(&d);
            let (cluster, _) = nearest_row(x_w.view(), model.clusters.centroids.view());
            let score = model.discriminants.vectors.row(cluster).dot(&x_w);
            (cluster, score)
        }
        ClusterSpace::CenteredOriginal => {
            let (cluster, _) = nearest_row(d.view(), model.clusters.centroids.view());
            let x_w = model.transform(&d);
            let score = model.discriminants.vectors.row(cluster).dot(&x_w);
            (cluster, score)
        }
    };
    Ok(decide(model, cluster, score))
}

/// Deployment without projection: route in the original centered space and
/// score with the precomputed fused vector. Requires a model whose
/// clustering ran in the centered original space.
pub fn apply_fused(x: ArrayView1<'_, f64>, model: &CorrectorModel) -> Result<Decision> {
    let fused = model
        .fused_vectors
        .as_ref()
        .ok_or(Error::MissingFusedVectors)?;
    let d = shifted_query(x, model)?;
    let (cluster, _) = nearest_row(d.view(), model.clusters.centroids.view());
    let score = fused.row(cluster).dot(&d);
    Ok(decide(model, cluster, score))
}

/// Applies the corrector to every row, in parallel, preserving row order.
pub fn apply_batch(
    points: ArrayView2<'_, f64>,
    model: &CorrectorModel,
    use_fused: bool,
) -> Result<Vec<Decision>> {
    let decisions = map_indexed(points.nrows(), |i| {
        if use_fused {
            apply_fused(points.row(i), model)
        } else {
            apply_corrector(points.row(i), model)
        }
    });
    decisions.into_iter().collect()
}

fn shifted_query(x: ArrayView1<'_, f64>, model: &CorrectorModel) -> Result<Array1<f64>> {
    if x.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            got: x.len(),
        });
    }
    ensure_finite_vec(x)?;
    Ok(&x - &model.centering.centroid)
}

fn decide(model: &CorrectorModel, cluster: usize, score: f64) -> Decision {
    let theta = model.discriminants.thresholds.for_cluster(cluster);
    let label = if score < theta {
        ClassLabel::Error
    } else {
        ClassLabel::Correct
    };
    Decision {
        label,
        cluster,
        score,
    }
}
