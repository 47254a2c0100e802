//! Training step 5: clustering the error set.
//!
//! Seeded k-means++ initialization followed by Lloyd iterations, capped at
//! 300. Empty clusters are re-seeded from the point currently farthest from
//! its centroid, and a final reassignment pass guarantees that every point
//! ends up in the cluster of its nearest centroid — the condition the 1-nn
//! deployment rule relies on.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::nearest_row;
use crate::parallel::map_indexed;

const MAX_LLOYD_ITERATIONS: usize = 300;
const MAX_EMPTY_FIXUPS: usize = 16;

/// Which coordinates the cluster centroids live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterSpace {
    /// Clustering ran after projection and whitening (centroids are m-dim).
    Whitened,
    /// Clustering ran on centroid-shifted original coordinates (n-dim),
    /// before dimensionality reduction.
    CenteredOriginal,
}

/// A partition of the error set into k nonempty clusters.
#[derive(Debug, Clone)]
pub struct ClusterPartition {
    /// k×d centroid matrix; d is m or n depending on `space`.
    pub centroids: Array2<f64>,
    /// Cluster index per input row. Empty on models loaded from disk (the
    /// serialized format carries centroids only).
    pub assignments: Vec<usize>,
    pub space: ClusterSpace,
}

impl ClusterPartition {
    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }
}

/// Clusters rows into k groups with seeded k-means++ and Lloyd iterations.
pub fn cluster_errors(points: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<ClusterPartition> {
    cluster_in_space(points, k, seed, ClusterSpace::Whitened)
}

/// Same as [`cluster_errors`] but records which space the points were in.
pub fn cluster_in_space(
    points: ArrayView2<'_, f64>,
    k: usize,
    seed: u64,
    space: ClusterSpace,
) -> Result<ClusterPartition> {
    let m = points.nrows();
    if k == 0 || k > m {
        return Err(Error::InvalidClusterCount { k, points: m });
    }

    let mut centroids = plus_plus_init(points, k, seed);
    let mut assignments = vec![usize::MAX; m];

    for _ in 0..MAX_LLOYD_ITERATIONS {
        let next = assign_all(points, centroids.view());
        if next == assignments {
            break;
        }
        assignments = next;
        update_centroids(points, &assignments, &mut centroids);
        fix_empty_clusters(points, &mut assignments, &mut centroids)?;
    }

    // Final reassignment pass: deployment routes queries by nearest centroid,
    // so training must leave every point in exactly that cluster.
    for _ in 0..MAX_EMPTY_FIXUPS {
        assignments = assign_all(points, centroids.view());
        let mut counts = vec![0usize; k];
        for &a in &assignments {
            counts[a] += 1;
        }
        if counts.iter().all(|&c| c > 0) {
            return Ok(ClusterPartition {
                centroids,
                assignments,
                space,
            });
        }
        fix_empty_clusters(points, &mut assignments, &mut centroids)?;
    }
    Err(Error::DegenerateClustering { k })
}

/// k-means++ seeding: first centroid uniform, then proportional to squared
/// distance from the nearest chosen centroid. Deterministic for a fixed seed.
fn plus_plus_init(points: ArrayView2<'_, f64>, k: usize, seed: u64) -> Array2<f64> {
    let m = points.nrows();
    let d = points.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Array2::zeros((k, d));

    let first = rng.random_range(0..m);
    centroids.row_mut(0).assign(&points.row(first));
    let mut dist2: Vec<f64> = map_indexed(m, |i| {
        let diff = &points.row(i) - &centroids.row(0);
        diff.dot(&diff)
    });

    for c in 1..k {
        let total: f64 = dist2.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = m - 1;
            for (i, &w) in dist2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All remaining mass is on already-chosen points (duplicates);
            // fall back to the first index not yet used as a centroid.
            (0..m)
                .find(|&i| dist2[i] > 0.0 || !is_centroid(points.row(i), centroids.view(), c))
                .unwrap_or(0)
        };
        centroids.row_mut(c).assign(&points.row(chosen));
        let cent = centroids.row(c).to_owned();
        for (i, slot) in dist2.iter_mut().enumerate() {
            let diff = &points.row(i) - &cent;
            let d2 = diff.dot(&diff);
            if d2 < *slot {
                *slot = d2;
            }
        }
    }
    centroids
}

fn is_centroid(
    point: ndarray::ArrayView1<'_, f64>,
    centroids: ArrayView2<'_, f64>,
    used: usize,
) -> bool {
    (0..used).any(|c| centroids.row(c) == point)
}

fn assign_all(points: ArrayView2<'_, f64>, centroids: ArrayView2<'_, f64>) -> Vec<usize> {
    map_indexed(points.nrows(), |i| nearest_row(points.row(i), centroids).0)
}

fn update_centroids(
    points: ArrayView2<'_, f64>,
    assignments: &[usize],
    centroids: &mut Array2<f64>,
) {
    let k = centroids.nrows();
    let mut counts = vec![0usize; k];
    centroids.fill(0.0);
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        let mut row = centroids.row_mut(a);
        row += &points.row(i);
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let mut row = centroids.row_mut(c);
            row /= count as f64;
        }
    }
}

/// Re-seeds every empty cluster from the point farthest from its own
/// centroid (among points whose cluster has more than one member).
fn fix_empty_clusters(
    points: ArrayView2<'_, f64>,
    assignments: &mut [usize],
    centroids: &mut Array2<f64>,
) -> Result<()> {
    let k = centroids.nrows();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return Ok(());
        };
        let mut farthest: Option<(usize, f64)> = None;
        for (i, &a) in assignments.iter().enumerate() {
            if counts[a] <= 1 {
                continue;
            }
            let diff = &points.row(i) - &centroids.row(a);
            let d2 = diff.dot(&diff);
            if farthest.map_or(true, |(_, best)| d2 > best) {
                farthest = Some((i, d2));
            }
        }
        let Some((idx, _)) = farthest else {
            return Err(Error::DegenerateClustering { k });
        };
        let donor = assignments[idx];
        centroids.row_mut(empty).assign(&points.row(idx));
        assignments[idx] = empty;
        // Recompute the donor's centroid without the moved point.
        let members: Vec<usize> = assignments
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == donor)
            .map(|(i, _)| i)
            .collect();
        let mut mean = ndarray::Array1::zeros(points.ncols());
        for &i in &members {
            mean += &points.row(i);
        }
        mean /= members.len() as f64;
        centroids.row_mut(donor).assign(&mean);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::row_mean;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = array![[1.0, 0.0], [3.0, 2.0], [5.0, 4.0]];
        let part = cluster_errors(pts.view(), 1, 7).unwrap();
        assert_eq!(part.k(), 1);
        assert_eq!(part.assignments, vec![0, 0, 0]);
        let mean = row_mean(pts.view());
        for (a, b) in part.centroids.row(0).iter().zip(mean.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_planted_blobs_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        let centers = [[-5.0, 0.0], [5.0, 1.0]];
        for c in &centers {
            for _ in 0..200 {
                rows.push([
                    c[0] + rng.random_range(-0.02..0.02),
                    c[1] + rng.random_range(-0.02..0.02),
                ]);
            }
        }
        let pts = Array2::from_shape_vec((400, 2), rows.into_iter().flatten().collect()).unwrap();
        let part = cluster_errors(pts.view(), 2, 11).unwrap();
        // Match each planted center to its closest recovered centroid.
        for c in &centers {
            let best = part
                .centroids
                .rows()
                .into_iter()
                .map(|r| {
                    let dx = r[0] - c[0];
                    let dy = r[1] - c[1];
                    (dx * dx + dy * dy).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.1, "planted center {c:?} missed by {best}");
        }
    }

    #[test]
    fn k_equals_point_count_gives_singletons() {
        let pts = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [4.0, 4.0]];
        let part = cluster_errors(pts.view(), 4, 1).unwrap();
        let mut seen = part.assignments.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
        for (i, &a) in part.assignments.iter().enumerate() {
            let diff = &pts.row(i) - &part.centroids.row(a);
            assert_eq!(diff.dot(&diff), 0.0);
        }
    }

    #[test]
    fn invalid_cluster_counts_error() {
        let pts = array![[0.0], [1.0]];
        assert!(matches!(
            cluster_errors(pts.view(), 3, 0),
            Err(Error::InvalidClusterCount { k: 3, points: 2 })
        ));
        assert!(matches!(
            cluster_errors(pts.view(), 0, 0),
            Err(Error::InvalidClusterCount { k: 0, points: 2 })
        ));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts = Array2::from_shape_fn((60, 3), |_| rng.random_range(-1.0..1.0));
        let a = cluster_errors(pts.view(), 5, 99).unwrap();
        let b = cluster_errors(pts.view(), 5, 99).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.centroids, b.centroids);
    }

    #[test]
    fn every_point_lands_in_nearest_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts = Array2::from_shape_fn((150, 4), |_| rng.random_range(-1.0..1.0));
        let part = cluster_errors(pts.view(), 7, 5).unwrap();
        for (i, &a) in part.assignments.iter().enumerate() {
            let (nearest, _) = nearest_row(pts.row(i), part.centroids.view());
            assert_eq!(nearest, a, "point {i} assigned to {a}, nearest {nearest}");
        }
        // No empty clusters.
        let mut counts = vec![0; 7];
        for &a in &part.assignments {
            counts[a] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn converged_centroids_are_cluster_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts = Array2::from_shape_fn((80, 2), |_| rng.random_range(-1.0..1.0));
        let part = cluster_errors(pts.view(), 3, 17).unwrap();
        for c in 0..3 {
            let members: Vec<usize> = part
                .assignments
                .iter()
                .enumerate()
                .filter(|(_, &a)| a == c)
                .map(|(i, _)| i)
                .collect();
            let mut mean = ndarray::Array1::<f64>::zeros(2);
            for &i in &members {
                mean += &pts.row(i);
            }
            mean /= members.len() as f64;
            for (a, b) in part.centroids.row(c).iter().zip(mean.iter()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
