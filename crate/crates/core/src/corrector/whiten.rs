//! Training step 4: whitening along the retained components.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Diagonal of W = diag(1/√λ₁, …, 1/√λ_m).
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningWeights {
    pub inv_sqrt_eigenvalues: Array1<f64>,
}

impl WhiteningWeights {
    /// Weights paired with a basis's eigenvalues.
    pub fn from_eigenvalues(eigenvalues: &Array1<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::param(
                "eigenvalues",
                "whitening needs strictly positive finite eigenvalues",
            ));
        }
        Ok(WhiteningWeights {
            inv_sqrt_eigenvalues: eigenvalues.mapv(|l| 1.0 / l.sqrt()),
        })
    }

    pub fn len(&self) -> usize {
        self.inv_sqrt_eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_sqrt_eigenvalues.is_empty()
    }
}

/// Scales each column i of projected points by 1/√λ_i.
pub fn whiten(points: ArrayView2<'_, f64>, weights: &WhiteningWeights) -> Result<Array2<f64>> {
    if points.ncols() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: points.ncols(),
        });
    }
    Ok(&points * &weights.inv_sqrt_eigenvalues.view().insert_axis(ndarray::Axis(0)))
}
