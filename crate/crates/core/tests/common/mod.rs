//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;

use cmosb::data::{AttackProbeSet, VerticalDataset};
use cmosb::secureboost::{BinnedBlock, Hyperparameters, LeafTrace};
use rand::Rng;

/// Tree grown by the centralized reference trainer. `feature` indexes the
/// concatenated (active, then passive) columns.
#[derive(Debug, Clone, PartialEq)]
pub enum RefNode {
    Split {
        feature: usize,
        bin: usize,
        threshold: f64,
        gain: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
    Leaf {
        weight: f64,
    },
}

const LAMBDA: f64 = 1.0;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        x.exp() / (1.0 + x.exp())
    }
}

/// Per-output gradient columns for logistic / softmax loss.
fn gradients(scores: &[Vec<f64>], labels: &[usize]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let k = scores.len();
    let n = labels.len();
    if k == 1 {
        let p: Vec<f64> = scores[0].iter().map(|&s| sigmoid(s)).collect();
        let g = p.iter().zip(labels).map(|(p, &y)| p - y as f64).collect();
        let h = p.iter().map(|p| p * (1.0 - p)).collect();
        return vec![(g, h)];
    }
    let mut out = vec![(vec![0.0; n], vec![0.0; n]); k];
    for i in 0..n {
        let max = (0..k).map(|c| scores[c][i]).fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = (0..k).map(|c| (scores[c][i] - max).exp()).collect();
        let total: f64 = e.iter().sum();
        for c in 0..k {
            let p = e[c] / total;
            out[c].0[i] = p - if labels[i] == c { 1.0 } else { 0.0 };
            out[c].1[i] = p * (1.0 - p);
        }
    }
    out
}

struct Centralized<'a> {
    block: &'a BinnedBlock,
    labels: &'a [usize],
    max_depth: usize,
}

impl Centralized<'_> {
    fn sums(rows: &[usize], g: &[f64], h: &[f64]) -> (f64, f64) {
        let mut gs = 0.0;
        let mut hs = 0.0;
        for &r in rows {
            gs += g[r];
            hs += h[r];
        }
        (gs, hs)
    }

    fn grow(&self, rows: Vec<usize>, depth: usize, g: &[f64], h: &[f64]) -> RefNode {
        let first = self.labels[rows[0]];
        let pure = rows.iter().all(|&r| self.labels[r] == first);
        let (gt, ht) = Self::sums(&rows, g, h);
        let leaf = RefNode::Leaf { weight: -gt / (ht + LAMBDA) };
        if pure || depth >= self.max_depth || rows.len() < 2 {
            return leaf;
        }
        let parent = gt * gt / (ht + LAMBDA);
        let mut best: Option<(usize, usize, f64)> = None;
        for (f, codes) in self.block.codes.iter().enumerate() {
            let nb = self.block.bins[f].num_bins();
            let mut hg = vec![0.0; nb];
            let mut hh = vec![0.0; nb];
            let mut hn = vec![0usize; nb];
            for &r in &rows {
                let b = codes[r] as usize;
                hg[b] += g[r];
                hh[b] += h[r];
                hn[b] += 1;
            }
            let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0);
            for b in 0..nb - 1 {
                gl += hg[b];
                hl += hh[b];
                nl += hn[b];
                if nl == 0 || nl == rows.len() {
                    continue;
                }
                let (gr, hr) = (gt - gl, ht - hl);
                let gain = 0.5 * (gl * gl / (hl + LAMBDA) + gr * gr / (hr + LAMBDA) - parent);
                if best.map_or(true, |(.., bg)| gain > bg) {
                    best = Some((f, b, gain));
                }
            }
        }
        match best {
            Some((f, b, gain)) if gain > 0.0 => {
                let codes = &self.block.codes[f];
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| codes[i] as usize <= b);
                RefNode::Split {
                    feature: f,
                    bin: b,
                    threshold: self.block.bins[f].threshold(b),
                    gain,
                    left: Box::new(self.grow(l, depth + 1, g, h)),
                    right: Box::new(self.grow(r, depth + 1, g, h)),
                }
            }
            _ => leaf,
        }
    }

    fn predict(node: &RefNode, codes: &[Vec<u8>], row: usize) -> f64 {
        match node {
            RefNode::Leaf { weight } => *weight,
            RefNode::Split { feature, bin, left, right, .. } => {
                if codes[*feature][row] as usize <= *bin {
                    Self::predict(left, codes, row)
                } else {
                    Self::predict(right, codes, row)
                }
            }
        }
    }
}

/// Plain boosting on all rows of the concatenated feature matrix, one tree
/// per class per round for multiclass tasks. Returns trees in round-major,
/// class-minor order.
pub fn centralized_gbdt(ds: &VerticalDataset, hp: &Hyperparameters, max_bins: usize) -> Vec<RefNode> {
    let block = BinnedBlock::fit(&ds.concatenated_features(), max_bins);
    let n = ds.len();
    let k = if ds.num_classes() == 2 { 1 } else { ds.num_classes() };
    let trainer = Centralized {
        block: &block,
        labels: ds.labels(),
        max_depth: hp.max_depth,
    };
    let mut scores = vec![vec![0.0; n]; k];
    let mut trees = Vec::new();
    for _ in 0..hp.n_federated {
        let grads = gradients(&scores, ds.labels());
        let round: Vec<RefNode> = grads
            .iter()
            .map(|(g, h)| trainer.grow((0..n).collect(), 0, g, h))
            .collect();
        for (c, tree) in round.into_iter().enumerate() {
            for (i, s) in scores[c].iter_mut().enumerate() {
                *s += hp.learning_rate * Centralized::predict(&tree, &block.codes, i);
            }
            trees.push(tree);
        }
    }
    trees
}

/// Pairwise fraction of contributing trees in which two probes share a leaf,
/// evaluated pair by pair.
pub fn brute_force_similarity(trace: &LeafTrace, probe: &AttackProbeSet) -> Vec<Vec<f64>> {
    let trees: Vec<_> = trace.trees.iter().filter(|t| !t.leaves.is_empty()).collect();
    let sets: Vec<Vec<HashSet<u64>>> = trees
        .iter()
        .map(|t| t.leaves.iter().map(|l| l.iter().copied().collect()).collect())
        .collect();
    let m = probe.len();
    let mut out = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            let (ia, ib) = (probe.ids[a], probe.ids[b]);
            let shared = sets
                .iter()
                .filter(|leaves| leaves.iter().any(|l| l.contains(&ia) && l.contains(&ib)))
                .count();
            out[a][b] = shared as f64 / trees.len() as f64;
        }
    }
    out
}

fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Ranks by repeatedly peeling off the points no remaining point dominates.
pub fn brute_force_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let mut rank = vec![usize::MAX; points.len()];
    let mut level = 0;
    while rank.iter().any(|&r| r == usize::MAX) {
        let open: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == usize::MAX).collect();
        let layer: Vec<usize> = open
            .iter()
            .copied()
            .filter(|&i| !open.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        for i in layer {
            rank[i] = level;
        }
        level += 1;
    }
    rank
}

/// Monte Carlo estimate of the volume dominated by `points` inside the box
/// spanned by their minimum and `z`.
pub fn monte_carlo_hv(points: &[[f64; 3]], z: [f64; 3], samples: usize, rng: &mut impl Rng) -> f64 {
    let mut lo = z;
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
        }
    }
    let volume: f64 = (0..3).map(|k| z[k] - lo[k]).product();
    let mut hits = 0usize;
    for _ in 0..samples {
        let s = [
            rng.gen_range(lo[0]..z[0]),
            rng.gen_range(lo[1]..z[1]),
            rng.gen_range(lo[2]..z[2]),
        ];
        if points.iter().any(|p| p[0] <= s[0] && p[1] <= s[1] && p[2] <= s[2]) {
            hits += 1;
        }
    }
    volume * hits as f64 / samples as f64
}
