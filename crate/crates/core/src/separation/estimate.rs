//! Monte Carlo estimators that pit empirical separability frequencies
//! against the closed-form bounds.
//!
//! Each trial owns an RNG substream derived from the master seed by trial
//! index, so reports are bit-identical for a fixed seed regardless of how
//! trials are spread over workers.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fisher::fisher_separable;
use crate::parallel::map_indexed;

use super::bounds::{dichotomy_bound, remark2_bounds, theorem1_bound, BoundParams};
use super::sampler::{fill_unit_ball_point, substream_rng};

/// Outcome of a Monte Carlo separability experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    pub trials: u64,
    pub successes: u64,
    pub empirical_frequency: f64,
    pub theoretical_bound: f64,
    /// Binomial standard error √(f(1−f)/trials).
    pub standard_error: f64,
}

impl SeparabilityReport {
    pub fn from_counts(successes: u64, trials: u64, theoretical_bound: f64) -> Self {
        let f = successes as f64 / trials as f64;
        SeparabilityReport {
            trials,
            successes,
            empirical_frequency: f,
            theoretical_bound,
            standard_error: (f * (1.0 - f) / trials as f64).sqrt(),
        }
    }

    /// The testable content of the bounds: the empirical frequency may fall
    /// below the theoretical bound by at most `margin` standard errors.
    pub fn dominates_bound(&self, margin: f64) -> bool {
        self.empirical_frequency + margin * self.standard_error >= self.theoretical_bound
    }
}

fn sample_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let mut m = Array2::zeros((rows, cols));
    for mut row in m.rows_mut() {
        fill_unit_ball_point(rng, row.as_slice_mut().expect("contiguous row"));
    }
    m
}

/// Estimates how often a fresh uniform-ball point is Fisher separable from a
/// fresh uniform-ball sample of `params.samples` points in dimension
/// `params.dim`, and compares against the closed-form bound evaluated at
/// `params` (use C = 1, r = 1 for the built-in sampler).
pub fn estimate_theorem1(params: &BoundParams, trials: u64, seed: u64) -> Result<SeparabilityReport> {
    let bound = theorem1_bound(params)?;
    let n = params.dim;
    let m = params.samples;
    let successes: u64 = map_indexed(trials as usize, |t| {
        let mut rng = substream_rng(seed, t as u64);
        let sample = sample_matrix(&mut rng, m, n);
        let mut x = vec![0.0; n];
        fill_unit_ball_point(&mut rng, &mut x);
        let x = Array1::from(x);
        fisher_separable(x.view(), sample.view(), 1.0) as u64
    })
    .into_iter()
    .sum();
    Ok(SeparabilityReport::from_counts(successes, trials, bound))
}

/// True iff the two-sided alternative holds for this sample and point:
/// either y is Fisher separable from every row of `sample`, or every row is
/// Fisher separable from y while y lies inside the ball of radius 1/√2.
pub fn dichotomy_holds(sample: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> bool {
    if fisher_separable(y, sample, 1.0) {
        return true;
    }
    if y.dot(&y) > 0.5 {
        return false;
    }
    sample
        .rows()
        .into_iter()
        .all(|x| x.dot(&x) > x.dot(&y))
}

/// Monte Carlo check of the dichotomy for the uniform ball: per trial, draw a
/// sample of `m` points and an independent point y, count the trial as a
/// success iff [`dichotomy_holds`], and compare against 1 − M·(1/√2)ⁿ.
pub fn check_dichotomy(n: usize, m: usize, trials: u64, seed: u64) -> Result<SeparabilityReport> {
    let params = BoundParams::uniform_ball(n, m)?;
    let bound = dichotomy_bound(&params)?;
    let successes: u64 = map_indexed(trials as usize, |t| {
        let mut rng = substream_rng(seed, t as u64);
        let sample = sample_matrix(&mut rng, m, n);
        let mut y = vec![0.0; n];
        fill_unit_ball_point(&mut rng, &mut y);
        let y = Array1::from(y);
        dichotomy_holds(sample.view(), y.view()) as u64
    })
    .into_iter()
    .sum();
    Ok(SeparabilityReport::from_counts(successes, trials, bound))
}

/// Empirical error fractions of the hyperplane rule h(z) = (z, w) + κε with
/// w = −e₁, checked against the cap-volume bounds ρ_x, ρ_y.
#[derive(Debug, Clone, PartialEq)]
pub struct Remark2Report {
    pub count: u64,
    /// Fraction of correct-class points with h(z) ≤ 0 (false negatives).
    pub missed_x_fraction: f64,
    /// Fraction of error-class points with h(z) > 0 (false positives).
    pub leaked_y_fraction: f64,
    pub rho_x: f64,
    pub rho_y: f64,
    pub standard_error_x: f64,
    pub standard_error_y: f64,
}

impl Remark2Report {
    pub fn within_bounds(&self, margin: f64) -> bool {
        self.missed_x_fraction <= self.rho_x + margin * self.standard_error_x
            && self.leaked_y_fraction <= self.rho_y + margin * self.standard_error_y
    }
}

/// Samples `count` points from the origin-centered unit ball (correct class)
/// and `count` from the ball centered at ε·e₁ (error class), classifies both
/// with the hyperplane rule, and reports the error fractions next to the
/// closed-form bounds.
pub fn estimate_remark2(
    kappa: f64,
    epsilon: f64,
    n: usize,
    count: u64,
    seed: u64,
) -> Result<Remark2Report> {
    let (rho_x, rho_y) = remark2_bounds(kappa, epsilon, n)?;
    // h(z) = (z, w) + κε with w = −e₁; class X iff h > 0.
    let offset = kappa * epsilon;
    let outcomes: Vec<(u64, u64)> = map_indexed(count as usize, |t| {
        let mut rng = substream_rng(seed, t as u64);
        let mut point = vec![0.0; n];
        fill_unit_ball_point(&mut rng, &mut point);
        let h_x = -point[0] + offset;
        let missed_x = (h_x <= 0.0) as u64;
        fill_unit_ball_point(&mut rng, &mut point);
        let h_y = -(point[0] + epsilon) + offset;
        let leaked_y = (h_y > 0.0) as u64;
        (missed_x, leaked_y)
    });
    let missed: u64 = outcomes.iter().map(|o| o.0).sum();
    let leaked: u64 = outcomes.iter().map(|o| o.1).sum();
    let fx = missed as f64 / count as f64;
    let fy = leaked as f64 / count as f64;
    Ok(Remark2Report {
        count,
        missed_x_fraction: fx,
        leaked_y_fraction: fy,
        rho_x,
        rho_y,
        standard_error_x: (fx * (1.0 - fx) / count as f64).sqrt(),
        standard_error_y: (fy * (1.0 - fy) / count as f64).sqrt(),
    })
}

/// Monte Carlo estimate for separation with a random linear combination of
/// known vectors: per trial, draw coefficients α from the caller's sampler,
/// form H(α, xᵢ) = (w, w) − (w, xᵢ) with w = Σ α_j z_j, and record whether
/// every H is positive.
///
/// `empirical_frequency` estimates Pr[∀i: H > 0]; `theoretical_bound` is the
/// Monte Carlo estimate of 1 − Σᵢ Pr[H(α, xᵢ) ≤ 0], clamped at zero — the
/// union-bound side estimated from the same trials, never computed
/// symbolically.
pub fn estimate_theorem2<F>(
    alpha_sampler: F,
    z_basis: ArrayView2<'_, f64>,
    sample: ArrayView2<'_, f64>,
    trials: u64,
    seed: u64,
) -> Result<SeparabilityReport>
where
    F: Fn(&mut ChaCha8Rng) -> Array1<f64> + Sync + Send,
{
    let d = z_basis.nrows();
    let n = z_basis.ncols();
    if sample.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sample.ncols(),
        });
    }
    let outcomes: Vec<Result<(u64, u64)>> = map_indexed(trials as usize, |t| {
        let mut rng = substream_rng(seed, t as u64);
        let alpha = alpha_sampler(&mut rng);
        if alpha.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: alpha.len(),
            });
        }
        let w = z_basis.t().dot(&alpha);
        let ww = w.dot(&w);
        let mut violations = 0u64;
        for x in sample.rows() {
            if ww - w.dot(&x) <= 0.0 {
                violations += 1;
            }
        }
        Ok(((violations == 0) as u64, violations))
    });
    let mut successes = 0u64;
    let mut total_violations = 0u64;
    for o in outcomes {
        let (s, v) = o?;
        successes += s;
        total_violations += v;
    }
    let union_bound = (1.0 - total_violations as f64 / trials as f64).max(0.0);
    Ok(SeparabilityReport::from_counts(successes, trials, union_bound))
}
