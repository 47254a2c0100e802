//! Labeled feature matrices.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::ensure_finite;

/// Which side of the corrector a training row belongs to.
///
/// `Correct` rows come from the base classifier behaving correctly (the set
/// the corrector must leave alone); `Error` rows are its known mistakes (the
/// set the corrector must capture).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassLabel {
    Correct,
    Error,
}

impl ClassLabel {
    /// CSV encoding: 0 = correct class, 1 = error class.
    pub fn to_bit(self) -> u8 {
        match self {
            ClassLabel::Correct => 0,
            ClassLabel::Error => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(ClassLabel::Correct),
            1 => Some(ClassLabel::Error),
            _ => None,
        }
    }
}

/// An M×n feature matrix (rows are samples) with one label per row.
///
/// All entries are finite; M ≥ 1 and n ≥ 1. Either class may be empty at
/// construction time — training enforces its own per-class minimums.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<ClassLabel>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<ClassLabel>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InsufficientData {
                needed: 1,
                got: features.nrows().min(features.ncols()),
            });
        }
        if labels.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        ensure_finite(features.view())?;
        Ok(LabeledDataset { features, labels })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Rows of one class, in their original order.
    pub fn class_rows(&self, label: ClassLabel) -> Array2<f64> {
        let idx: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect();
        self.features.select(Axis(0), &idx)
    }

    /// (correct-class count, error-class count).
    pub fn class_counts(&self) -> (usize, usize) {
        let errors = self
            .labels
            .iter()
            .filter(|l| **l == ClassLabel::Error)
            .count();
        (self.labels.len() - errors, errors)
    }
}
