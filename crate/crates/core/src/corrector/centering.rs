//! Training step 1: centroid removal.

use ndarray::{Array1, Array2, Axis};

use crate::dataset::{ClassLabel, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::row_mean;

/// Centroid of the correct-class training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringStats {
    pub centroid: Array1<f64>,
}

/// Computes the correct-class centroid and shifts both classes by it.
///
/// Returns the stats, the centered correct-class rows (column means zero) and
/// the error-class rows shifted by the same centroid. The error class may be
/// empty; the correct class may not.
pub fn fit_centering(
    dataset: &LabeledDataset,
) -> Result<(CenteringStats, Array2<f64>, Array2<f64>)> {
    let x = dataset.class_rows(ClassLabel::Correct);
    if x.nrows() == 0 {
        return Err(Error::EmptyClass("correct-class"));
    }
    let centroid = row_mean(x.view());
    let shift = centroid.view().insert_axis(Axis(0));
    let x_centered = &x - &shift;
    let y = dataset.class_rows(ClassLabel::Error);
    let y_shifted = if y.nrows() == 0 { y } else { &y - &shift };
    Ok((CenteringStats { centroid }, x_centered, y_shifted))
}
