//! k-means with k-means++ seeding plus silhouette-based selection of k.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sq_dist, ClusterError, FeatureMatrix, FEATURE_DIM};

const MAX_ITERS: usize = 300;
const RESTART_STRIDE: u64 = 0x9e37_79b9_7f4a_7c15;

/// Result of one clustering run. Labels are 0-based and sorted by cluster
/// size descending, so label `i` is cluster `C(i+1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    /// Cluster label per matrix row.
    pub assignments: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Centroids in standardized space, label order.
    pub centroids: Vec<[f64; FEATURE_DIM]>,
    pub mean_silhouette: f64,
    /// Within-cluster sum of squared distances.
    pub sse: f64,
    /// SSE after each Lloyd iteration of the winning restart.
    pub sse_history: Vec<f64>,
    /// Index of the winning restart.
    pub restart: usize,
}

struct LloydRun {
    assignments: Vec<usize>,
    centroids: Vec<[f64; FEATURE_DIM]>,
    sse: f64,
    sse_history: Vec<f64>,
}

fn kmeans_pp_init(x: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; FEATURE_DIM]> {
    let n = x.len();
    let mut centroids: Vec<[f64; FEATURE_DIM]> = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centroids.push(x.row(first).try_into().unwrap());
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total <= 0.0 {
            // All remaining points coincide with a centroid.
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let centroid: [f64; FEATURE_DIM] = x.row(next).try_into().unwrap();
        for i in 0..n {
            dist[i] = dist[i].min(sq_dist(x.row(i), &centroid));
        }
        centroids.push(centroid);
    }
    centroids
}

fn lloyd(x: &FeatureMatrix, k: usize, seed: u64) -> LloydRun {
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_init(x, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut sse_history = Vec::new();
    let mut sse = f64::INFINITY;

    for _ in 0..MAX_ITERS {
        // Assignment step.
        let mut changed = false;
        let mut new_sse = 0.0;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = sq_dist(x.row(i), &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(x.row(i), centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
            new_sse += best_d;
        }
        sse = new_sse;
        sse_history.push(sse);
        if !changed {
            break;
        }

        // Update step.
        let mut sums = vec![[0.0; FEATURE_DIM]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = assignments[i];
            counts[c] += 1;
            for j in 0..FEATURE_DIM {
                sums[c][j] += x.row(i)[j];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster at the point farthest from its
                // current centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(x.row(a), &centroids[assignments[a]])
                            .total_cmp(&sq_dist(x.row(b), &centroids[assignments[b]]))
                    })
                    .unwrap();
                centroids[c] = x.row(far).try_into().unwrap();
            } else {
                for j in 0..FEATURE_DIM {
                    centroids[c][j] = sums[c][j] / counts[c] as f64;
                }
            }
        }
    }

    LloydRun {
        assignments,
        centroids,
        sse,
        sse_history,
    }
}

/// Relabel clusters by size descending (stable on ties by old label).
fn relabel_by_size(run: LloydRun, k: usize) -> (Vec<usize>, Vec<usize>, Vec<[f64; FEATURE_DIM]>) {
    let mut sizes = vec![0usize; k];
    for &a in &run.assignments {
        sizes[a] += 1;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut rank = vec![0usize; k];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let assignments: Vec<usize> = run.assignments.iter().map(|&a| rank[a]).collect();
    let centroids: Vec<[f64; FEATURE_DIM]> = order.iter().map(|&old| run.centroids[old]).collect();
    let sizes: Vec<usize> = order.iter().map(|&old| sizes[old]).collect();
    (assignments, sizes, centroids)
}

/// Best-of-restarts k-means. Deterministic given `seed`: restarts run in
/// parallel and the winner is chosen by (SSE, restart index).
pub fn kmeans(
    x: &FeatureMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<ClusterResult, ClusterError> {
    if k < 2 {
        return Err(ClusterError::KTooSmall(k));
    }
    if x.len() <= k {
        return Err(ClusterError::TooFewPoints { n: x.len(), k });
    }
    let restarts = restarts.max(1);
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let restart_seed = seed.wrapping_add((r as u64).wrapping_mul(RESTART_STRIDE));
            (r, lloyd(x, k, restart_seed))
        })
        .reduce_with(|a, b| {
            let pick_a = match a.1.sse.total_cmp(&b.1.sse) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.0 < b.0,
            };
            if pick_a {
                a
            } else {
                b
            }
        })
        .expect("at least one restart");

    let (restart, run) = best;
    let sse = run.sse;
    let sse_history = run.sse_history.clone();
    let (assignments, sizes, centroids) = relabel_by_size(run, k);
    let mean_silhouette = mean_silhouette(x, &assignments)?;
    Ok(ClusterResult {
        k,
        assignments,
        sizes,
        centroids,
        mean_silhouette,
        sse,
        sse_history,
        restart,
    })
}

/// Mean silhouette over all points (Euclidean distance). Points in singleton
/// clusters score 0; a point equidistant from everything (a == b == 0)
/// also scores 0.
pub fn mean_silhouette(x: &FeatureMatrix, assignments: &[usize]) -> Result<f64, ClusterError> {
    let n = x.len();
    assert_eq!(assignments.len(), n);
    let k = assignments.iter().max().map_or(0, |&m| m + 1);
    if k < 2 {
        return Err(ClusterError::KTooSmall(k));
    }
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }

    // Per-point scores land in an indexed Vec and are summed sequentially,
    // keeping the result bit-identical regardless of rayon's work splits.
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sum_to = vec![0.0f64; k];
            for j in 0..n {
                if i != j {
                    sum_to[assignments[j]] += sq_dist(x.row(i), x.row(j)).sqrt();
                }
            }
            let own = assignments[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let a = sum_to[own] / (sizes[own] - 1) as f64;
            let mut b = f64::INFINITY;
            for c in 0..k {
                if c != own && sizes[c] > 0 {
                    b = b.min(sum_to[c] / sizes[c] as f64);
                }
            }
            let denom = a.max(b);
            if denom <= 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / n as f64)
}

/// Silhouette curve over a range of k values and the winning clustering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KSelection {
    pub best_k: usize,
    /// (k, mean silhouette) pairs over the evaluated range.
    pub curve: Vec<(usize, f64)>,
    pub best: ClusterResult,
}

/// Evaluate `k` over an inclusive range by mean silhouette; ties go to the
/// smaller k.
pub fn select_k(
    x: &FeatureMatrix,
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
    restarts: usize,
) -> Result<KSelection, ClusterError> {
    let k_max = *k_range.end();
    if x.len() <= k_max {
        return Err(ClusterError::TooFewPoints { n: x.len(), k: k_max });
    }
    let mut curve = Vec::new();
    let mut best: Option<(usize, ClusterResult)> = None;
    for k in k_range {
        let result = kmeans(x, k, seed, restarts)?;
        curve.push((k, result.mean_silhouette));
        let better = match &best {
            None => true,
            Some((_, b)) => result.mean_silhouette > b.mean_silhouette,
        };
        if better {
            best = Some((k, result));
        }
    }
    let (best_k, best) = best.expect("non-empty k range");
    Ok(KSelection { best_k, curve, best })
}
