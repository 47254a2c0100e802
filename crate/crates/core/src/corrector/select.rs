//! Training step 3a: choosing how many principal components to keep.

use ndarray::ArrayView1;

use crate::error::{Error, Result};

use super::pca::EIGENVALUE_FLOOR;

/// How the retained principal components are chosen.
///
/// Ranges are 1-based and inclusive, so `ExplicitRange { lo: 20, hi: 40 }`
/// keeps the 20th through 40th components (21 of them).
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionRule {
    /// Keep components whose eigenvalue strictly exceeds the mean of all
    /// positive eigenvalues.
    Kaiser,
    /// Keep the leading components whose share of total variance exceeds the
    /// broken-stick expectation b_i = (1/p)·Σ_{j=i..p} 1/j.
    BrokenStick,
    /// Keep components with λ₁/λ_i ≤ cap.
    Conditioning { cap: f64 },
    /// Keep an explicit 1-based inclusive band of components.
    ExplicitRange { lo: usize, hi: usize },
}

impl SelectionRule {
    pub const DEFAULT_CONDITION_CAP: f64 = 1e3;
}

/// Returns the retained 0-based indices for non-increasing `eigenvalues`.
///
/// Whatever the rule says, components below the eigenvalue floor
/// (λ < λ₁·1e-12) are excluded. The result is nonempty or an error.
pub fn select_components(
    eigenvalues: ArrayView1<'_, f64>,
    rule: &SelectionRule,
) -> Result<Vec<usize>> {
    if eigenvalues.is_empty() || eigenvalues[0] <= 0.0 {
        return Err(Error::NoComponentsSelected(
            "no positive eigenvalues".into(),
        ));
    }
    for w in eigenvalues.windows(2) {
        if w[0] < w[1] {
            return Err(Error::param("eigenvalues", "must be non-increasing"));
        }
    }
    let floor = eigenvalues[0] * EIGENVALUE_FLOOR;
    // Count of components that any rule is allowed to keep.
    let usable = eigenvalues.iter().take_while(|&&l| l > floor).count();

    let retained: Vec<usize> = match rule {
        SelectionRule::Kaiser => {
            let positive: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > 0.0).collect();
            let mean = positive.iter().sum::<f64>() / positive.len() as f64;
            (0..usable).take_while(|&i| eigenvalues[i] > mean).collect()
        }
        SelectionRule::BrokenStick => {
            let p = eigenvalues.len();
            let total: f64 = eigenvalues.iter().filter(|&&l| l > 0.0).sum();
            // b_i for 1-based i: (1/p)·Σ_{j=i..p} 1/j, computed back to front.
            let mut stick = vec![0.0; p];
            let mut acc = 0.0;
            for i in (0..p).rev() {
                acc += 1.0 / (i + 1) as f64;
                stick[i] = acc / p as f64;
            }
            (0..usable)
                .take_while(|&i| eigenvalues[i] / total > stick[i])
                .collect()
        }
        SelectionRule::Conditioning { cap } => {
            if !cap.is_finite() || *cap < 1.0 {
                return Err(Error::param("cap", "conditioning cap must be ≥ 1"));
            }
            (0..usable)
                .take_while(|&i| eigenvalues[0] / eigenvalues[i] <= *cap)
                .collect()
        }
        SelectionRule::ExplicitRange { lo, hi } => {
            if *lo == 0 || lo > hi {
                return Err(Error::param(
                    "range",
                    format!("bad component range {lo}..={hi}; indices are 1-based"),
                ));
            }
            if *lo > usable {
                return Err(Error::ComponentRangeOutOfBounds {
                    lo: *lo,
                    hi: *hi,
                    max: usable,
                });
            }
            (lo - 1..(*hi).min(usable)).collect()
        }
    };

    if retained.is_empty() {
        return Err(Error::NoComponentsSelected(format!("{rule:?}")));
    }
    Ok(retained)
}
