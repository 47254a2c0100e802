//! Closed-form separability bounds.

use crate::error::{Error, Result};

/// Distribution regularity constants (C, r) together with the ambient
/// dimension and the sample size the bound is evaluated for.
///
/// For the uniform unit ball both assumptions hold with C = 1, r = 1; other
/// distributions must supply their own constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub c: f64,
    pub r: f64,
    /// Ambient dimension n.
    pub dim: usize,
    /// Number of sample points M.
    pub samples: usize,
}

impl BoundParams {
    pub fn new(c: f64, r: f64, dim: usize, samples: usize) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::param("c", "must be a positive real"));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::param("r", "must be a positive real"));
        }
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        if samples == 0 {
            return Err(Error::param("samples", "must be at least 1"));
        }
        Ok(BoundParams { c, r, dim, samples })
    }

    /// Constants for the built-in uniform unit-ball sampler.
    pub fn uniform_ball(dim: usize, samples: usize) -> Result<Self> {
        Self::new(1.0, 1.0, dim, samples)
    }
}

/// Lower bound on the probability that a fresh point is Fisher separable
/// from M given points: max(0, 1 − M·C·(r/2)ⁿ). Requires r ∈ (0, 2).
pub fn theorem1_bound(params: &BoundParams) -> Result<f64> {
    if !(params.r > 0.0 && params.r < 2.0) {
        return Err(Error::param("r", "theorem 1 requires r in (0, 2)"));
    }
    let miss = params.samples as f64 * params.c * (params.r / 2.0).powi(params.dim as i32);
    Ok((1.0 - miss).max(0.0))
}

/// Smallest dimension n with M·C·(r/2)ⁿ ≤ δ, i.e. the ceiling of
/// (log M + log C − log δ)/(log 2 − log r), clamped at zero.
pub fn min_dimension(samples: usize, c: f64, delta: f64, r: f64) -> Result<u32> {
    if samples == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param("c", "must be a positive real"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::param("r", "requires r in (0, 2)"));
    }
    let numerator = (samples as f64).ln() + c.ln() - delta.ln();
    let denominator = 2.0_f64.ln() - r.ln();
    let bound = numerator / denominator;
    if bound <= 0.0 {
        return Ok(0);
    }
    Ok(bound.ceil() as u32)
}

/// The two bounds for a point y with ‖y‖ = `y_norm` against M sample points,
/// both clamped to [0, 1].
///
/// `point_from_set` bounds the probability that y is Fisher separable from
/// the whole sample; `set_from_point` bounds the probability that every
/// sample point is Fisher separable from y. A clamped value of exactly zero
/// means the bound is vacuous at these parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem3Bounds {
    pub point_from_set: f64,
    pub set_from_point: f64,
}

impl Theorem3Bounds {
    pub fn point_from_set_vacuous(&self) -> bool {
        self.point_from_set == 0.0
    }

    pub fn set_from_point_vacuous(&self) -> bool {
        self.set_from_point == 0.0
    }
}

pub fn theorem3_bounds(y_norm: f64, params: &BoundParams) -> Result<Theorem3Bounds> {
    if !(0.0..=1.0).contains(&y_norm) {
        return Err(Error::param("y_norm", "must lie in [0, 1]"));
    }
    let n = params.dim as i32;
    let mc = params.samples as f64 * params.c;
    let from_set = 1.0 - mc * ((1.0 - y_norm * y_norm).sqrt() * params.r).powi(n);
    let from_point = 1.0 - mc * (y_norm * params.r).powi(n);
    Ok(Theorem3Bounds {
        point_from_set: from_set.clamp(0.0, 1.0),
        set_from_point: from_point.clamp(0.0, 1.0),
    })
}

/// Lower bound for the two-sided dichotomy: 1 − M·C·(r/√2)ⁿ, clamped to
/// [0, 1]. Requires r < √2.
pub fn dichotomy_bound(params: &BoundParams) -> Result<f64> {
    if !(params.r > 0.0 && params.r < 2.0_f64.sqrt()) {
        return Err(Error::param("r", "the dichotomy requires r < √2"));
    }
    let miss =
        params.samples as f64 * params.c * (params.r / 2.0_f64.sqrt()).powi(params.dim as i32);
    Ok((1.0 - miss).clamp(0.0, 1.0))
}

/// Cap-volume bounds for the hyperplane split of two ε-separated balls:
/// ρ_x = (1 − κ²ε²)^(n/2) bounds the missed fraction of the correct class,
/// ρ_y = (1 − (1−κ)²ε²)^(n/2) bounds the leaked fraction of the error class.
pub fn remark2_bounds(kappa: f64, epsilon: f64, n: usize) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::param("kappa", "must lie in (0, 1)"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::param("epsilon", "must be a positive real"));
    }
    if kappa * epsilon > 1.0 || (1.0 - kappa) * epsilon > 1.0 {
        return Err(Error::param(
            "epsilon",
            "requires κ·ε ≤ 1 and (1−κ)·ε ≤ 1",
        ));
    }
    let half_n = n as f64 / 2.0;
    let rho_x = (1.0 - (kappa * epsilon).powi(2)).powf(half_n);
    let rho_y = (1.0 - ((1.0 - kappa) * epsilon).powi(2)).powf(half_n);
    Ok((rho_x, rho_y))
}
