//! Lloyd k-means over device positions.
//!
//! Used to site gateways from a trial scatter and by the `cluster` CLI
//! command. Seeding is k-means++ with a handful of deterministic restarts;
//! the returned clustering is the best objective seen.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

const RESTARTS: u64 = 8;

/// Result of one k-means run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering<S> {
    pub centroids: Vec<Point<S>>,
    /// Device index -> centroid index; every device is assigned to its
    /// nearest centroid, ties broken toward the lowest index.
    pub assignment: Vec<usize>,
    /// Per-cluster radius: max absolute per-dimension offset of members
    /// from the centroid.
    pub radii_km: Vec<S>,
    /// Mean squared member-to-centroid distance.
    pub objective: S,
    /// Objective after each Lloyd iteration of the winning restart;
    /// non-increasing by construction.
    pub objective_history: Vec<S>,
}

impl<S: Scalar> Clustering<S> {
    /// Recomputes the objective from the stored assignment.
    pub fn objective_from_assignment(&self, devices: &[Point<S>]) -> S {
        mean_sq_distance(devices, &self.centroids, &self.assignment)
    }
}

/// Radius of one cluster. Errors on an out-of-range index or an empty
/// cluster (which Lloyd with reseeding never produces).
pub fn cluster_radius<S: Scalar>(clustering: &Clustering<S>, cluster_index: usize) -> Result<S> {
    clustering
        .radii_km
        .get(cluster_index)
        .copied()
        .ok_or_else(|| Error::domain("cluster_radius", format!("no cluster {cluster_index}")))
}

/// Lloyd iteration: assign each device to the nearest centroid by Euclidean
/// distance, recompute centroids as member means, stop when the objective
/// improves by less than `tol` or after `max_iters`. An emptied cluster is
/// reseeded at the device farthest from its current centroid.
pub fn kmeans_cluster<S: Scalar>(
    devices: &[Point<S>],
    k: usize,
    max_iters: usize,
    tol: S,
    seed: u64,
) -> Result<Clustering<S>> {
    if devices.is_empty() {
        return Err(Error::domain("kmeans", "no devices to cluster"));
    }
    if k == 0 || k > devices.len() {
        return Err(Error::domain(
            "kmeans",
            format!("k = {k} outside 1..={}", devices.len()),
        ));
    }

    let mut best: Option<Clustering<S>> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let centroids = plus_plus_seed(devices, k, &mut rng);
        let run = lloyd(devices, centroids, max_iters, tol);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn plus_plus_seed<S: Scalar, R: Rng>(devices: &[Point<S>], k: usize, rng: &mut R) -> Vec<Point<S>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(devices[rng.gen_range(0..devices.len())]);
    let mut d2: Vec<f64> = devices
        .iter()
        .map(|p| p.distance_sq(&centroids[0]).to_f64().unwrap_or(f64::MAX))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining mass at existing centroids; pick uniformly.
            rng.gen_range(0..devices.len())
        } else {
            let mut target = rng.gen_range(0.0..total);
            let mut idx = devices.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    idx = i;
                    break;
                }
                target -= *w;
            }
            idx
        };
        let c = devices[next];
        centroids.push(c);
        for (i, p) in devices.iter().enumerate() {
            let nd = p.distance_sq(&c).to_f64().unwrap_or(f64::MAX);
            if nd < d2[i] {
                d2[i] = nd;
            }
        }
    }
    centroids
}

fn lloyd<S: Scalar>(devices: &[Point<S>], mut centroids: Vec<Point<S>>, max_iters: usize, tol: S) -> Clustering<S> {
    let k = centroids.len();
    let mut assignment = vec![0usize; devices.len()];
    let mut history = Vec::new();
    let mut prev_obj: Option<S> = None;

    for _ in 0..max_iters.max(1) {
        assign_nearest(devices, &centroids, &mut assignment);
        fix_empty_clusters(devices, &mut centroids, &mut assignment, k);
        recompute_centroids(devices, &mut centroids, &assignment, k);

        let obj = mean_sq_distance(devices, &centroids, &assignment);
        history.push(obj);
        if let Some(prev) = prev_obj {
            if prev - obj < tol {
                break;
            }
        }
        prev_obj = Some(obj);
    }

    // Final pass so the assignment is nearest-centroid for the returned
    // centroids as well.
    assign_nearest(devices, &centroids, &mut assignment);
    let objective = mean_sq_distance(devices, &centroids, &assignment);

    let mut radii = vec![S::zero(); k];
    for (i, p) in devices.iter().enumerate() {
        let c = assignment[i];
        let r = p.chebyshev(&centroids[c]);
        if r > radii[c] {
            radii[c] = r;
        }
    }

    Clustering { centroids, assignment, radii_km: radii, objective, objective_history: history }
}

fn assign_nearest<S: Scalar>(devices: &[Point<S>], centroids: &[Point<S>], assignment: &mut [usize]) {
    for (i, p) in devices.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = p.distance_sq(&centroids[0]);
        for (j, c) in centroids.iter().enumerate().skip(1) {
            let d = p.distance_sq(c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        assignment[i] = best;
    }
}

fn fix_empty_clusters<S: Scalar>(
    devices: &[Point<S>],
    centroids: &mut [Point<S>],
    assignment: &mut [usize],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignment.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        // Move the centroid onto the device farthest from its current one.
        let mut far_i = 0usize;
        let mut far_d = S::neg_infinity();
        for (i, p) in devices.iter().enumerate() {
            if counts[assignment[i]] <= 1 {
                continue;
            }
            let d = p.distance_sq(&centroids[assignment[i]]);
            if d > far_d {
                far_d = d;
                far_i = i;
            }
        }
        centroids[empty] = devices[far_i];
        assignment[far_i] = empty;
    }
}

fn recompute_centroids<S: Scalar>(
    devices: &[Point<S>],
    centroids: &mut [Point<S>],
    assignment: &[usize],
    k: usize,
) {
    let mut sums = vec![(S::zero(), S::zero(), 0usize); k];
    for (i, p) in devices.iter().enumerate() {
        let e = &mut sums[assignment[i]];
        e.0 = e.0 + p.x;
        e.1 = e.1 + p.y;
        e.2 += 1;
    }
    for (c, (sx, sy, n)) in centroids.iter_mut().zip(sums) {
        if n > 0 {
            let nf = S::of(n as f64);
            *c = Point::new(sx / nf, sy / nf);
        }
    }
}

fn mean_sq_distance<S: Scalar>(devices: &[Point<S>], centroids: &[Point<S>], assignment: &[usize]) -> S {
    let total: S = devices
        .iter()
        .zip(assignment)
        .map(|(p, &a)| p.distance_sq(&centroids[a]))
        .sum();
    total / S::of(devices.len() as f64)
}
