//! Seeded samplers for ball-supported distributions.
//!
//! Points are drawn as a Gaussian direction scaled by U^(1/n), which is
//! uniform in the ball in any dimension. For the uniform unit ball both
//! regularity constants are C = 1, r = 1: a half-radius ball carries at most
//! (1/2)^n of the mass, and the density equals 1/V_n everywhere on the
//! support. Those constants feed the bound evaluators directly.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// RNG for one unit of parallel work: substream `index` of the master seed.
/// Splitting by counter keeps results independent of the worker count.
pub(crate) fn substream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub(crate) fn fill_unit_ball_point(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let n = out.len();
    loop {
        let mut norm2 = 0.0;
        for slot in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *slot = g;
            norm2 += g * g;
        }
        if norm2 > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / n as f64);
            let scale = radius / norm2.sqrt();
            for slot in out.iter_mut() {
                *slot *= scale;
            }
            return;
        }
    }
}

/// `count` points uniform in the unit ball of ℝⁿ, one per row.
pub fn sample_unit_ball(n: usize, count: usize, seed: u64) -> Array2<f64> {
    let mut rng = substream_rng(seed, 0);
    let mut points = Array2::zeros((count, n));
    for mut row in points.rows_mut() {
        fill_unit_ball_point(&mut rng, row.as_slice_mut().expect("contiguous row"));
    }
    points
}

/// `count` points uniform in the unit ball centered at ε·e₁.
///
/// The shift direction is fixed to the first coordinate axis; rotation
/// invariance of the ball makes the choice immaterial.
pub fn sample_shifted_ball(n: usize, count: usize, epsilon: f64, seed: u64) -> Array2<f64> {
    let mut points = sample_unit_ball(n, count, seed);
    if epsilon != 0.0 {
        for mut row in points.rows_mut() {
            row[0] += epsilon;
        }
    }
    points
}
