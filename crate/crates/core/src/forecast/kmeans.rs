//! Weighted k-means over flattened path coordinates.
//!
//! Seeding is greedy farthest-point from a seeded random first pick;
//! Lloyd iterations run until centroids move less than 1e-9 or 100
//! rounds. Every returned representative is a medoid (the member
//! nearest its centroid), so outputs are always actual paths.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::SeededRng;

pub struct Clustering {
    /// Medoid sample index per cluster.
    pub medoids: Vec<usize>,
    /// Cluster assignment per sample.
    pub assignment: Vec<usize>,
    /// Weight share per cluster (sums to 1 over nonempty inputs).
    pub weights: Vec<f64>,
    /// Final weighted sum of squared distances to centroids.
    pub objective: f64,
    /// Objective after each Lloyd iteration.
    pub objective_curve: Vec<f64>,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster `points` (all the same dimension) into `k` groups.
pub fn kmeans(points: &[Vec<f64>], weights: &[f64], k: usize, seed: u64) -> Clustering {
    assert!(k >= 1 && points.len() >= k);
    assert_eq!(points.len(), weights.len());
    let mut rng = SeededRng::new(seed);

    // Farthest-point seeding from a random first centroid.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.index(points.len())].clone());
    let mut min_d: Vec<f64> = points.iter().map(|p| dist_sq(p, &centroids[0])).collect();
    while centroids.len() < k {
        let mut best = 0;
        for (i, &d) in min_d.iter().enumerate() {
            if d > min_d[best] {
                best = i;
            }
        }
        centroids.push(points[best].clone());
        for (i, p) in points.iter().enumerate() {
            let d = dist_sq(p, centroids.last().unwrap());
            if d < min_d[i] {
                min_d[i] = d;
            }
        }
    }

    let dim = points[0].len();
    let mut assignment = vec![0usize; points.len()];
    let mut objective_curve = Vec::new();
    for _ in 0..100 {
        // Assign.
        let mut objective = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = dist_sq(p, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = dist_sq(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = best;
            objective += weights[i] * best_d;
        }
        objective_curve.push(objective);

        // Update; empty clusters keep their centroid.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut mass = vec![0.0; k];
        for (i, p) in points.iter().enumerate() {
            let c = assignment[i];
            mass[c] += weights[i];
            for (s, &v) in sums[c].iter_mut().zip(p) {
                *s += weights[i] * v;
            }
        }
        let mut movement = 0.0f64;
        for c in 0..k {
            if mass[c] > 0.0 {
                let mut new_c = sums[c].clone();
                for v in new_c.iter_mut() {
                    *v /= mass[c];
                }
                movement = movement.max(dist_sq(&centroids[c], &new_c));
                centroids[c] = new_c;
            }
        }
        if movement < 1e-9 * 1e-9 {
            break;
        }
    }

    // Medoids: nearest member, or nearest sample overall for an empty
    // cluster (degenerate inputs).
    let mut medoids = vec![usize::MAX; k];
    let mut medoid_d = vec![f64::INFINITY; k];
    for (i, p) in points.iter().enumerate() {
        let c = assignment[i];
        let d = dist_sq(p, &centroids[c]);
        if d < medoid_d[c] {
            medoid_d[c] = d;
            medoids[c] = i;
        }
    }
    for c in 0..k {
        if medoids[c] == usize::MAX {
            let mut best = 0;
            let mut best_d = dist_sq(&points[0], &centroids[c]);
            for (i, p) in points.iter().enumerate().skip(1) {
                let d = dist_sq(p, &centroids[c]);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            medoids[c] = best;
        }
    }

    let total_mass: f64 = weights.iter().sum();
    let mut cluster_weights = vec![0.0; k];
    for (i, &c) in assignment.iter().enumerate() {
        cluster_weights[c] += weights[i];
    }
    if total_mass > 0.0 {
        for w in cluster_weights.iter_mut() {
            *w /= total_mass;
        }
    }

    Clustering {
        medoids,
        assignment,
        weights: cluster_weights,
        objective: *objective_curve.last().unwrap(),
        objective_curve,
    }
}
