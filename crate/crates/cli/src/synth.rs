//! Synthetic labeled datasets for experiments and benchmarks.

use anyhow::{bail, Result};
use edgc_core::separation::{sample_shifted_ball, sample_unit_ball};
use edgc_core::{ClassLabel, LabeledDataset};
use ndarray::{concatenate, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// The built-in generators.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Correct class uniform in the unit ball, error class uniform in a unit
    /// ball shifted by ε along the first axis.
    TwoBalls { epsilon: f64 },
    /// Correct class uniform in the unit ball; error class split over
    /// `clusters` blobs whose centers sit at distance `separation` from the
    /// origin in random directions, each blob a ball of radius `spread`.
    PlantedClusters {
        clusters: usize,
        spread: f64,
        separation: f64,
    },
    /// Both classes uniform in the unit ball (null case: nothing to learn).
    UniformBall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub x_count: usize,
    pub y_count: usize,
    pub generator: Generator,
}

// Decorrelates the error-class stream from the correct-class stream.
const Y_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Deterministically generates a labeled dataset from a spec and seed.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<LabeledDataset> {
    if spec.n == 0 {
        bail!("dimension must be at least 1");
    }
    if spec.x_count == 0 || spec.y_count == 0 {
        bail!("both classes need at least one point");
    }
    let x = sample_unit_ball(spec.n, spec.x_count, seed);
    let y = match &spec.generator {
        Generator::TwoBalls { epsilon } => {
            if !(epsilon.is_finite() && *epsilon > 0.0) {
                bail!("two-balls requires a positive epsilon");
            }
            sample_shifted_ball(spec.n, spec.y_count, *epsilon, seed ^ Y_SEED_SALT)
        }
        Generator::UniformBall => sample_unit_ball(spec.n, spec.y_count, seed ^ Y_SEED_SALT),
        Generator::PlantedClusters {
            clusters,
            spread,
            separation,
        } => {
            if *clusters == 0 || *clusters > spec.y_count {
                bail!(
                    "planted-clusters needs 1 ≤ clusters ≤ y-count, got {clusters} for {}",
                    spec.y_count
                );
            }
            if !(spread.is_finite() && *spread >= 0.0) || !(separation.is_finite() && *separation >= 0.0)
            {
                bail!("spread and separation must be nonnegative");
            }
            let centers = random_directions(*clusters, spec.n, seed ^ Y_SEED_SALT) * *separation;
            let noise = sample_unit_ball(spec.n, spec.y_count, seed ^ Y_SEED_SALT ^ 1) * *spread;
            let mut y = noise;
            for (i, mut row) in y.rows_mut().into_iter().enumerate() {
                row += &centers.row(i % clusters);
            }
            y
        }
    };
    let features = concatenate(Axis(0), &[x.view(), y.view()])?;
    let mut labels = vec![ClassLabel::Correct; spec.x_count];
    labels.extend(vec![ClassLabel::Error; spec.y_count]);
    Ok(LabeledDataset::new(features, labels)?)
}

/// `count` unit vectors in ℝⁿ, one per row.
pub fn random_directions(count: usize, n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = Array2::zeros((count, n));
    for mut row in dirs.rows_mut() {
        loop {
            let mut norm2 = 0.0_f64;
            for slot in row.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *slot = g;
                norm2 += g * g;
            }
            if norm2 > 0.0 {
                row /= norm2.sqrt();
                break;
            }
        }
    }
    dirs
}

/// `count` rows orthonormalized by two passes of modified Gram-Schmidt.
/// Panics if `count > n`.
pub fn random_orthonormal_rows(count: usize, n: usize, seed: u64) -> Array2<f64> {
    assert!(count <= n, "cannot orthonormalize {count} rows in {n} dims");
    let mut rows = random_directions(count, n, seed);
    for _pass in 0..2 {
        for i in 0..count {
            for j in 0..i {
                let proj = rows.row(i).dot(&rows.row(j));
                let prev = rows.row(j).to_owned();
                let mut row = rows.row_mut(i);
                row.scaled_add(-proj, &prev);
            }
            let norm = rows.row(i).dot(&rows.row(i)).sqrt();
            let mut row = rows.row_mut(i);
            row /= norm;
        }
    }
    rows
}
