//! Small dense-matrix helpers shared across the crate.
//!
//! Conventions: samples are matrix rows, population covariance divides by the
//! count (one-point sets have zero covariance), symmetric eigendecompositions
//! are returned with eigenvalues in non-increasing order and eigenvectors as
//! rows.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};

/// Arithmetic mean of the rows.
pub fn row_mean(points: ArrayView2<'_, f64>) -> Array1<f64> {
    let m = points.nrows() as f64;
    points.sum_axis(Axis(0)) / m
}

/// Population covariance about the set's own mean.
pub fn covariance(points: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean = row_mean(points);
    let centered = &points - &mean.view().insert_axis(Axis(0));
    covariance_of_centered(centered.view())
}

/// Population covariance of data whose column means are already zero.
pub fn covariance_of_centered(centered: ArrayView2<'_, f64>) -> Array2<f64> {
    let m = centered.nrows() as f64;
    centered.t().dot(&centered) / m
}

/// Eigendecomposition of a symmetric matrix, eigenvalues non-increasing,
/// eigenvectors as rows matching the eigenvalue order. Eigenvalues of
/// positive semidefinite inputs are clamped at zero to absorb roundoff.
pub fn symmetric_eigh_desc(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (vals, vecs) = a.eigh(UPLO::Lower)?;
    let n = vals.len();
    // LAPACK returns ascending eigenvalues with eigenvectors as columns.
    let eigenvalues = Array1::from_iter(vals.iter().rev().map(|&v| v.max(0.0)));
    let mut rows = Array2::zeros((n, a.ncols()));
    for (out, j) in (0..n).rev().enumerate() {
        rows.row_mut(out).assign(&vecs.column(j));
    }
    Ok((eigenvalues, rows))
}

/// Index of the row nearest to `point` (squared Euclidean distance) together
/// with that distance. Ties resolve to the lowest index.
///
/// Every routing decision in the crate goes through this function so that
/// clustering and deployment agree bit-for-bit on nearest-centroid choices.
pub fn nearest_row(point: ArrayView1<'_, f64>, rows: ArrayView2<'_, f64>) -> (usize, f64) {
    debug_assert_eq!(point.len(), rows.ncols());
    let mut best_idx = 0usize;
    let mut best = f64::INFINITY;
    if let (Some(p), Some(data)) = (point.as_slice(), rows.as_slice()) {
        let n = rows.ncols();
        for (i, row) in data.chunks_exact(n).enumerate() {
            let mut acc = 0.0;
            for (a, b) in p.iter().zip(row) {
                let d = a - b;
                acc += d * d;
            }
            if acc < best {
                best = acc;
                best_idx = i;
            }
        }
    } else {
        for (i, row) in rows.rows().into_iter().enumerate() {
            let mut acc = 0.0;
            for (a, b) in point.iter().zip(row.iter()) {
                let d = a - b;
                acc += d * d;
            }
            if acc < best {
                best = acc;
                best_idx = i;
            }
        }
    }
    (best_idx, best)
}

/// Error if any entry is NaN or infinite.
pub fn ensure_finite(points: ArrayView2<'_, f64>) -> Result<()> {
    for (i, row) in points.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Error if any entry of a vector is NaN or infinite.
pub fn ensure_finite_vec(v: ArrayView1<'_, f64>) -> Result<()> {
    for (j, x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row: 0, col: j });
        }
    }
    Ok(())
}
