//! ROC/AUC evaluation, sliding-window score integration, and
//! principal-component relevance.
//!
//! Score orientation: higher scores look like the correct class; a query is
//! flagged as an error iff its score falls strictly below the threshold. The
//! ROC therefore treats the error class as the positive detection — the true
//! positive rate is the fraction of errors removed, the false positive rate
//! the fraction of correct outputs lost.

use ndarray::{ArrayView1, Axis};

use crate::corrector::ProjectionBasis;
use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

/// One operating point: flag as error iff score < threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
}

/// Threshold sweep over the distinct score values plus a final point at +∞,
/// so the curve always runs from (0, 0) to (1, 1) in (fpr, tpr) space.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    /// Trapezoidal area under the curve.
    pub auc: f64,
}

/// Builds the ROC curve for scores labeled with ground truth.
///
/// Both classes must be present. Tied scores collapse onto a single
/// threshold point.
pub fn roc_curve(scores: &[f64], labels: &[ClassLabel]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let positives = labels.iter().filter(|l| **l == ClassLabel::Error).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::EmptyClass(if positives == 0 {
            "error-class"
        } else {
            "correct-class"
        }));
    }
    for (i, s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Walking thresholds upward accumulates the points with score < θ.
    let mut points = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        points.push(RocPoint {
            threshold,
            false_positive_rate: fp as f64 / negatives as f64,
            true_positive_rate: tp as f64 / positives as f64,
        });
        // Consume every sample tied at this threshold.
        while i < order.len() && scores[order[i]] == threshold {
            match labels[order[i]] {
                ClassLabel::Error => tp += 1,
                ClassLabel::Correct => fp += 1,
            }
            i += 1;
        }
    }
    points.push(RocPoint {
        threshold: f64::INFINITY,
        false_positive_rate: 1.0,
        true_positive_rate: 1.0,
    });

    let mut auc = 0.0;
    for pair in points.windows(2) {
        let dx = pair[1].false_positive_rate - pair[0].false_positive_rate;
        let avg = 0.5 * (pair[1].true_positive_rate + pair[0].true_positive_rate);
        auc += dx * avg;
    }
    Ok(RocCurve { points, auc })
}

/// Mean of each length-`window` run of a binary stream: output[i] is the
/// average of inputs i..i+window, so the result has len − window + 1 entries.
pub fn sliding_window_score(binary_outputs: &[bool], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::param("window", "must be at least 1"));
    }
    if window > binary_outputs.len() {
        return Err(Error::param(
            "window",
            format!(
                "window {window} exceeds stream length {}",
                binary_outputs.len()
            ),
        ));
    }
    let mut sum: u64 = binary_outputs[..window].iter().map(|&b| b as u64).sum();
    let mut out = Vec::with_capacity(binary_outputs.len() - window + 1);
    out.push(sum as f64 / window as f64);
    for i in window..binary_outputs.len() {
        sum += binary_outputs[i] as u64;
        sum -= binary_outputs[i - window] as u64;
        out.push(sum as f64 / window as f64);
    }
    Ok(out)
}

/// |cos| of the angle between the class-mean difference and each retained
/// component: values near 1 mark components that carry the class split.
pub fn relative_relevance(
    x_mean: ArrayView1<'_, f64>,
    y_mean: ArrayView1<'_, f64>,
    basis: &ProjectionBasis,
) -> Result<Vec<f64>> {
    if x_mean.len() != basis.n_features() || y_mean.len() != basis.n_features() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_features(),
            got: x_mean.len(),
        });
    }
    let diff = &x_mean - &y_mean;
    let norm = diff.dot(&diff).sqrt();
    if norm == 0.0 {
        return Err(Error::param(
            "means",
            "class means coincide; relevance is undefined",
        ));
    }
    let unit = diff / norm;
    Ok(basis
        .components()
        .axis_iter(Axis(0))
        .map(|h| {
            let hn = h.dot(&h).sqrt();
            (unit.dot(&h) / hn).abs()
        })
        .collect())
}
