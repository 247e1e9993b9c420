use std::collections::HashMap;

use crate::data::AttackProbeSet;
use crate::secureboost::LeafTrace;

/// Co-occurrence similarity over probe instances: the fraction of
/// contributing trees in which two instances share a recorded leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    size: usize,
    /// Raw co-occurrence counts, row-major.
    counts: Vec<u32>,
    n_trees: usize,
}

impl SimilarityMatrix {
    pub fn from_counts(size: usize, counts: Vec<u32>, n_trees: usize) -> Self {
        assert_eq!(counts.len(), size * size);
        assert!(n_trees > 0);
        Self {
            size,
            counts,
            n_trees,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of trees the similarity is averaged over.
    pub fn n_trees(&self) -> usize {
        self.n_trees
    }

    pub fn count(&self, a: usize, b: usize) -> u32 {
        self.counts[a * self.size + b]
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.count(a, b) as f64 / self.n_trees as f64
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|a| (0..self.size).map(|b| self.get(a, b)).collect())
            .collect()
    }
}

/// Result of building the similarity matrix; a trace without any recorded
/// leaf carries no signal at all.
#[derive(Debug, Clone, PartialEq)]
pub enum Similarity {
    Signal(SimilarityMatrix),
    NoSignal,
}

/// Builds the similarity matrix over `probe` instances from every trace tree
/// that recorded at least one leaf.
pub fn similarity_matrix(trace: &LeafTrace, probe: &AttackProbeSet) -> Similarity {
    let n_trees = trace.contributing_trees();
    if n_trees == 0 {
        return Similarity::NoSignal;
    }
    let size = probe.len();
    let position: HashMap<u64, usize> = probe.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut counts = vec![0u32; size * size];
    let mut members = Vec::new();
    for tree in trace.trees.iter().filter(|t| !t.leaves.is_empty()) {
        for leaf in &tree.leaves {
            members.clear();
            members.extend(leaf.iter().filter_map(|id| position.get(id).copied()));
            for &a in &members {
                for &b in &members {
                    counts[a * size + b] += 1;
                }
            }
        }
    }
    Similarity::Signal(SimilarityMatrix::from_counts(size, counts, n_trees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secureboost::TraceTree;

    fn probe(ids: &[u64]) -> AttackProbeSet {
        AttackProbeSet {
            ids: ids.to_vec(),
            labels: vec![0; ids.len()],
            num_classes: 2,
        }
    }

    fn trace(trees: Vec<Vec<Vec<u64>>>) -> LeafTrace {
        LeafTrace {
            trees: trees
                .into_iter()
                .enumerate()
                .map(|(tree_id, leaves)| TraceTree { tree_id, leaves })
                .collect(),
        }
    }

    fn signal(s: Similarity) -> SimilarityMatrix {
        match s {
            Similarity::Signal(m) => m,
            Similarity::NoSignal => panic!("expected signal"),
        }
    }

    #[test]
    fn single_tree() {
        let s = signal(similarity_matrix(&trace(vec![vec![vec![1, 2], vec![3]]]), &probe(&[1, 2, 3])));
        assert_eq!(s.get(0, 1), 1.0);
        assert_eq!(s.get(0, 2), 0.0);
        assert_eq!(s.get(2, 2), 1.0);
    }

    #[test]
    fn two_trees_average() {
        let t = trace(vec![vec![vec![1, 2], vec![3]], vec![vec![1], vec![2, 3]]]);
        let s = signal(similarity_matrix(&t, &probe(&[1, 2, 3])));
        assert_eq!(s.n_trees(), 2);
        assert_eq!(s.get(0, 1), 0.5);
        assert_eq!(s.get(1, 0), 0.5);
        assert_eq!(s.get(1, 2), 0.5);
        assert_eq!(s.get(0, 2), 0.0);
    }

    #[test]
    fn missing_from_a_tree_halves_self_similarity() {
        let t = trace(vec![vec![vec![1, 2]], vec![vec![2]]]);
        let s = signal(similarity_matrix(&t, &probe(&[1, 2])));
        assert_eq!(s.get(0, 0), 0.5);
        assert_eq!(s.get(1, 1), 1.0);
    }

    #[test]
    fn empty_trace_has_no_signal() {
        assert_eq!(similarity_matrix(&LeafTrace::default(), &probe(&[1])), Similarity::NoSignal);
        let t = trace(vec![vec![], vec![]]);
        assert_eq!(similarity_matrix(&t, &probe(&[1])), Similarity::NoSignal);
    }

    #[test]
    fn non_probe_instances_are_ignored() {
        let t = trace(vec![vec![vec![1, 99, 2]], vec![]]);
        let s = signal(similarity_matrix(&t, &probe(&[1, 2])));
        assert_eq!(s.n_trees(), 1);
        assert_eq!(s.size(), 2);
        assert_eq!(s.get(0, 1), 1.0);
    }
}
