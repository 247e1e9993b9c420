//! Normalized spectral clustering (Ng, Jordan & Weiss) with seeded k-means++.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::similarity::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::seed::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub eigen_tolerance: f64,
    pub kmeans_max_iter: usize,
    pub kmeans_restarts: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            eigen_tolerance: 1e-10,
            kmeans_max_iter: 100,
            kmeans_restarts: 10,
        }
    }
}

/// Cluster id in `0..num_clusters` per instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<usize>,
    pub num_clusters: usize,
}

impl ClusterAssignment {
    /// Members of each cluster.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_clusters];
        for (i, &c) in self.clusters.iter().enumerate() {
            groups[c].push(i);
        }
        groups
    }
}

pub fn spectral_cluster(s: &SimilarityMatrix, num_clusters: usize, seed: u64) -> Result<ClusterAssignment> {
    spectral_cluster_with(&s.to_dense(), num_clusters, seed, &SpectralConfig::default())
}

/// Clusters a symmetric non-negative affinity matrix into `num_clusters`
/// groups.
///
/// The diagonal is ignored. Instances with no affinity to any other instance
/// cannot be embedded; the `t`-th such instance is placed in cluster
/// `(m + t) mod C`, where `m` is the number of clusters used by the connected
/// instances.
pub fn spectral_cluster_with(
    affinity: &[Vec<f64>],
    num_clusters: usize,
    seed: u64,
    cfg: &SpectralConfig,
) -> Result<ClusterAssignment> {
    let n = affinity.len();
    if num_clusters < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 clusters, got {num_clusters}"
        )));
    }
    if affinity.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("affinity matrix is not square".into()));
    }

    let degree: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| affinity[i][j]).sum())
        .collect();
    let connected: Vec<usize> = (0..n).filter(|&i| degree[i] > 0.0).collect();
    let k = connected.len();
    let used = num_clusters.min(k);

    let mut clusters = vec![0usize; n];
    if k <= num_clusters {
        for (c, &i) in connected.iter().enumerate() {
            clusters[i] = c;
        }
    } else {
        let embedding = embed(affinity, &connected, &degree, num_clusters, cfg);
        let labels = kmeans(&embedding, num_clusters, seed, cfg);
        for (&i, &c) in connected.iter().zip(&labels) {
            clusters[i] = c;
        }
    }
    for (t, i) in (0..n).filter(|&i| degree[i] <= 0.0).enumerate() {
        clusters[i] = (used + t) % num_clusters;
    }
    Ok(ClusterAssignment {
        clusters,
        num_clusters,
    })
}

/// Rows of the top-`dims` eigenvectors of `D^{-1/2} A D^{-1/2}` restricted to
/// `nodes`, each normalized to unit length.
fn embed(
    affinity: &[Vec<f64>],
    nodes: &[usize],
    degree: &[f64],
    dims: usize,
    cfg: &SpectralConfig,
) -> Vec<Vec<f64>> {
    let k = nodes.len();
    let inv_sqrt: Vec<f64> = nodes.iter().map(|&i| 1.0 / degree[i].sqrt()).collect();
    let m = DMatrix::from_fn(k, k, |a, b| {
        if a == b {
            0.0
        } else {
            affinity[nodes[a]][nodes[b]] * inv_sqrt[a] * inv_sqrt[b]
        }
    });
    let eig = SymmetricEigen::try_new(m.clone(), cfg.eigen_tolerance, 0)
        .unwrap_or_else(|| SymmetricEigen::new(m));
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = &order[..dims.min(k)];

    (0..k)
        .map(|row| {
            let mut v: Vec<f64> = top.iter().map(|&col| eig.eigenvectors[(row, col)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_pp_init(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.gen_range(0..n)].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.push(points[next].clone());
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

/// Lloyd's algorithm from k-means++ seeds, best inertia over restarts.
/// Cluster ids are renumbered by first appearance.
pub(crate) fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, cfg: &SpectralConfig) -> Vec<usize> {
    let dims = points[0].len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..cfg.kmeans_restarts.max(1) {
        let mut rng = seed::rng(seed, &[stream::KMEANS, restart as u64]);
        let mut centers = kmeans_pp_init(points, k, &mut rng);
        let mut labels = vec![usize::MAX; points.len()];
        for _ in 0..cfg.kmeans_max_iter {
            let mut changed = false;
            for (label, p) in labels.iter_mut().zip(points) {
                let (c, _) = nearest(p, &centers);
                if *label != c {
                    *label = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![vec![0.0; dims]; k];
            let mut counts = vec![0usize; k];
            for (&label, p) in labels.iter().zip(points) {
                counts[label] += 1;
                sums[label].iter_mut().zip(p).for_each(|(s, x)| *s += x);
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
                }
            }
        }
        let inertia: f64 = labels
            .iter()
            .zip(points)
            .map(|(&l, p)| sq_dist(p, &centers[l]))
            .sum();
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    let labels = best.expect("at least one restart").1;
    let mut remap = vec![usize::MAX; k];
    let mut next = 0;
    labels
        .into_iter()
        .map(|l| {
            if remap[l] == usize::MAX {
                remap[l] = next;
                next += 1;
            }
            remap[l]
        })
        .collect()
}
