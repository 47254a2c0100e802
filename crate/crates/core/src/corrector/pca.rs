//! Training steps 2–3: principal components, component selection, projection.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::{covariance_of_centered, symmetric_eigh_desc};

use super::select::SelectionRule;

/// Components with eigenvalues below `λ₁ · EIGENVALUE_FLOOR` are never
/// retainable: whitening by 1/√λ would amplify noise without bound.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Full eigendecomposition of the population covariance of a centered set.
///
/// Eigenvalues are non-increasing and clamped at zero; eigenvectors are rows
/// of `components`, paired with `eigenvalues` by position.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub components: Array2<f64>,
}

/// Principal components retained for the pipeline: an orthonormal m×n basis
/// `H` (rows h₁…h_m) with strictly positive, non-increasing eigenvalues.
///
/// `selection` records which rule produced the basis; it is `None` on models
/// reconstructed from a serialized file, which does not carry the rule.
#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    components: Array2<f64>,
    eigenvalues: Array1<f64>,
    selection: Option<SelectionRule>,
}

impl ProjectionBasis {
    /// Assembles a basis from a decomposition and the retained indices.
    pub fn from_decomposition(
        decomp: &EigenDecomposition,
        retained: &[usize],
        selection: Option<SelectionRule>,
    ) -> Result<Self> {
        if retained.is_empty() {
            return Err(Error::NoComponentsSelected(
                "empty retained index set".into(),
            ));
        }
        let components = decomp.components.select(Axis(0), retained);
        let eigenvalues = Array1::from_iter(retained.iter().map(|&i| decomp.eigenvalues[i]));
        Self::from_raw(components, eigenvalues, selection)
    }

    /// Builds a basis from raw parts, validating the type invariants.
    pub fn from_raw(
        components: Array2<f64>,
        eigenvalues: Array1<f64>,
        selection: Option<SelectionRule>,
    ) -> Result<Self> {
        let m = components.nrows();
        if m == 0 || m > components.ncols() {
            return Err(Error::InsufficientData {
                needed: 1,
                got: m,
            });
        }
        if eigenvalues.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: eigenvalues.len(),
            });
        }
        for w in eigenvalues.windows(2) {
            if w[0] < w[1] {
                return Err(Error::param(
                    "eigenvalues",
                    "must be non-increasing",
                ));
            }
        }
        if eigenvalues[m - 1] <= 0.0 {
            return Err(Error::param("eigenvalues", "must be strictly positive"));
        }
        // Pairwise orthonormality within 1e-10.
        let gram = components.dot(&components.t());
        for i in 0..m {
            for j in 0..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (gram[[i, j]] - expect).abs() > 1e-10 {
                    return Err(Error::param(
                        "components",
                        format!("rows {i},{j} are not orthonormal"),
                    ));
                }
            }
        }
        Ok(ProjectionBasis {
            components,
            eigenvalues,
            selection,
        })
    }

    pub fn components(&self) -> ArrayView2<'_, f64> {
        self.components.view()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn selection(&self) -> Option<&SelectionRule> {
        self.selection.as_ref()
    }

    /// Number of retained components m.
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Ambient dimension n.
    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }
}

/// Eigendecomposition of the population covariance of `centered` rows.
///
/// Needs at least two rows. When the ambient dimension exceeds the sample
/// count the decomposition runs on the Gram matrix instead of the covariance;
/// that path recovers every eigenpair with `λ > λ₁·EIGENVALUE_FLOOR` (the
/// remaining eigenvalues are zero to machine precision and their directions
/// are not defined by the data).
pub fn fit_pca(centered: ArrayView2<'_, f64>) -> Result<EigenDecomposition> {
    let m = centered.nrows();
    let n = centered.ncols();
    if m < 2 {
        return Err(Error::InsufficientData { needed: 2, got: m });
    }

    let decomp = if n <= m {
        let cov = covariance_of_centered(centered);
        let (eigenvalues, components) = symmetric_eigh_desc(&cov)?;
        EigenDecomposition {
            eigenvalues,
            components,
        }
    } else {
        // Gram trick: X Xᵀ/M has the same nonzero spectrum as XᵀX/M, and
        // v = Xᵀu / √(Mλ) maps Gram eigenvectors to covariance eigenvectors.
        let gram = centered.dot(&centered.t()) / m as f64;
        let (vals, vecs) = symmetric_eigh_desc(&gram)?;
        let floor = vals[0] * EIGENVALUE_FLOOR;
        let rank = vals.iter().take_while(|&&v| v > floor).count();
        if rank == 0 {
            return Err(Error::RankZeroCovariance);
        }
        let mut components = Array2::zeros((rank, n));
        for i in 0..rank {
            let u = vecs.row(i);
            let v = centered.t().dot(&u);
            let norm = (m as f64 * vals[i]).sqrt();
            components.row_mut(i).assign(&(&v / norm));
        }
        EigenDecomposition {
            eigenvalues: vals.slice(ndarray::s![..rank]).to_owned(),
            components,
        }
    };

    if decomp.eigenvalues[0] <= 0.0 {
        return Err(Error::RankZeroCovariance);
    }
    Ok(decomp)
}

/// Projects rows onto the retained components: each row z maps to H·z.
pub fn project(points: ArrayView2<'_, f64>, basis: &ProjectionBasis) -> Result<Array2<f64>> {
    if points.ncols() != basis.n_features() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_features(),
            got: points.ncols(),
        });
    }
    Ok(points.dot(&basis.components.t()))
}
