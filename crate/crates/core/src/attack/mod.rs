//! Instance clustering label-inference attack over a passive party's leaf
//! trace.

mod mi;
mod similarity;
mod spectral;

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use mi::mutual_information;
pub use similarity::{similarity_matrix, Similarity, SimilarityMatrix};
pub use spectral::{spectral_cluster, spectral_cluster_with, ClusterAssignment, SpectralConfig};

use crate::data::AttackProbeSet;
use crate::error::{Error, Result};
use crate::secureboost::LeafTrace;
use crate::seed::{self, stream};

/// A probe instance whose label the attacker already holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownLabel {
    pub instance_id: u64,
    pub label: usize,
}

/// Picks `per_class` probe instances of each class as the attacker's labeled
/// seeds.
pub fn choose_known(probe: &AttackProbeSet, per_class: usize, seed: u64) -> Result<Vec<KnownLabel>> {
    let mut rng = seed::rng(seed, &[stream::ATTACK_KNOWN]);
    let mut known = Vec::with_capacity(per_class * probe.num_classes);
    for class in 0..probe.num_classes {
        let mut members: Vec<u64> = probe
            .ids
            .iter()
            .zip(&probe.labels)
            .filter(|(_, &y)| y == class)
            .map(|(&id, _)| id)
            .collect();
        if members.len() < per_class {
            return Err(Error::ClassTooSmall {
                class,
                available: members.len(),
                requested: per_class,
            });
        }
        members.shuffle(&mut rng);
        known.extend(members[..per_class].iter().map(|&instance_id| KnownLabel {
            instance_id,
            label: class,
        }));
    }
    Ok(known)
}

/// Maps clusters to labels. A cluster takes the label of the known instance
/// with the lowest id among those it contains. Clusters without any known
/// instance are then visited in id order and take the least used class so
/// far (lowest class id on ties).
pub fn assign_labels(clusters: &ClusterAssignment, known: &[KnownLabel], probe: &AttackProbeSet) -> Vec<usize> {
    let num_classes = probe.num_classes;
    let mut cluster_label: Vec<Option<(u64, usize)>> = vec![None; clusters.num_clusters];
    for k in known {
        if let Some(pos) = probe.ids.iter().position(|&id| id == k.instance_id) {
            let slot = &mut cluster_label[clusters.clusters[pos]];
            if slot.map_or(true, |(id, _)| k.instance_id < id) {
                *slot = Some((k.instance_id, k.label));
            }
        }
    }
    let mut usage = vec![0usize; num_classes];
    for &(_, label) in cluster_label.iter().flatten() {
        usage[label] += 1;
    }
    let labels: Vec<usize> = cluster_label
        .iter()
        .map(|slot| match slot {
            Some((_, label)) => *label,
            None => {
                let label = (0..num_classes).min_by_key(|&c| (usage[c], c)).unwrap_or(0);
                usage[label] += 1;
                label
            }
        })
        .collect();
    clusters.clusters.iter().map(|&c| labels[c]).collect()
}

/// Fraction of probe instances whose inferred label is correct.
pub fn leakage(inferred: &[usize], probe: &AttackProbeSet) -> f64 {
    assert_eq!(inferred.len(), probe.len(), "inferred labels must cover the probe set");
    if probe.is_empty() {
        return 0.0;
    }
    let hits = inferred.iter().zip(&probe.labels).filter(|(a, b)| a == b).count();
    hits as f64 / probe.len() as f64
}

/// Leakage given the outcome of the similarity stage: no signal means the
/// attacker can do no better than guessing.
pub fn leakage_or_floor(inferred: Option<&[usize]>, probe: &AttackProbeSet) -> f64 {
    match inferred {
        Some(y) => leakage(y, probe),
        None => 1.0 / probe.num_classes as f64,
    }
}

fn per_class_accuracy(inferred: &[usize], probe: &AttackProbeSet) -> Vec<f64> {
    (0..probe.num_classes)
        .map(|c| {
            let (hit, total) = inferred
                .iter()
                .zip(&probe.labels)
                .filter(|(_, &y)| y == c)
                .fold((0usize, 0usize), |(h, t), (&p, &y)| (h + usize::from(p == y), t + 1));
            if total == 0 {
                0.0
            } else {
                hit as f64 / total as f64
            }
        })
        .collect()
}

/// One known label per cluster: the true label of its most central member,
/// the one with the largest summed similarity to the rest of its cluster
/// (lowest id on ties).
pub fn cluster_known(clusters: &ClusterAssignment, similarity: &[Vec<f64>], probe: &AttackProbeSet) -> Vec<KnownLabel> {
    let mut best: Vec<Option<(f64, usize)>> = vec![None; clusters.num_clusters];
    for (i, &c) in clusters.clusters.iter().enumerate() {
        let centrality: f64 = clusters
            .clusters
            .iter()
            .enumerate()
            .filter(|&(j, &cj)| cj == c && j != i)
            .map(|(j, _)| similarity[i][j])
            .sum();
        let better = match best[c] {
            None => true,
            Some((v, k)) => centrality > v || (centrality == v && probe.ids[i] < probe.ids[k]),
        };
        if better {
            best[c] = Some((centrality, i));
        }
    }
    best.into_iter()
        .flatten()
        .map(|(_, i)| KnownLabel {
            instance_id: probe.ids[i],
            label: probe.labels[i],
        })
        .collect()
}

/// Where the attacker's known labels come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// The attacker knows the label of one instance inside every cluster.
    PerCluster,
    /// The attacker holds this many labeled probe instances per class, drawn
    /// before clustering.
    PerClass(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub labels: LabelSource,
    pub spectral: SpectralConfig,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            labels: LabelSource::PerCluster,
            spectral: SpectralConfig::default(),
        }
    }
}

impl AttackConfig {
    /// The fixed known labels for `probe`, or `None` when they are taken per
    /// cluster after clustering.
    pub fn known(&self, probe: &AttackProbeSet, seed: u64) -> Result<Option<Vec<KnownLabel>>> {
        match self.labels {
            LabelSource::PerCluster => Ok(None),
            LabelSource::PerClass(k) => choose_known(probe, k, seed).map(Some),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub epsilon_p: f64,
    pub n_trees: usize,
    #[serde(rename = "C")]
    pub num_classes: usize,
    #[serde(rename = "N_pl")]
    pub num_probes: usize,
    pub per_class_accuracy: Vec<f64>,
    pub seed: u64,
}

impl AttackReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Runs the full attack: similarity, spectral clustering, label mapping and
/// scoring against the probe's true labels. With `known` absent the attacker
/// knows one label per cluster (see [`cluster_known`]).
pub fn instance_clustering_attack(
    trace: &LeafTrace,
    probe: &AttackProbeSet,
    known: Option<&[KnownLabel]>,
    spectral: &SpectralConfig,
    seed: u64,
) -> Result<AttackReport> {
    if probe.is_empty() {
        return Err(Error::EmptyInstanceSet);
    }
    let c = probe.num_classes;
    let report = |epsilon_p, n_trees, per_class_accuracy| AttackReport {
        epsilon_p,
        n_trees,
        num_classes: c,
        num_probes: probe.len(),
        per_class_accuracy,
        seed,
    };
    match similarity_matrix(trace, probe) {
        Similarity::NoSignal => Ok(report(leakage_or_floor(None, probe), 0, vec![1.0 / c as f64; c])),
        Similarity::Signal(s) => {
            let dense = s.to_dense();
            let clusters = spectral_cluster_with(&dense, c, seed, spectral)?;
            let inferred = match known {
                Some(k) => assign_labels(&clusters, k, probe),
                None => assign_labels(&clusters, &cluster_known(&clusters, &dense, probe), probe),
            };
            Ok(report(
                leakage(&inferred, probe),
                s.n_trees(),
                per_class_accuracy(&inferred, probe),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secureboost::TraceTree;
    use rand::Rng;

    fn probe(labels: &[usize], c: usize) -> AttackProbeSet {
        AttackProbeSet {
            ids: (0..labels.len() as u64).map(|i| i * 10).collect(),
            labels: labels.to_vec(),
            num_classes: c,
        }
    }

    #[test]
    fn perfect_clusters_recover_labels() {
        let p = probe(&[0, 0, 1, 1, 2, 2], 3);
        let clusters = ClusterAssignment {
            clusters: vec![2, 2, 0, 0, 1, 1],
            num_clusters: 3,
        };
        let known = choose_known(&p, 1, 7).unwrap();
        assert_eq!(assign_labels(&clusters, &known, &p), p.labels);
    }

    #[test]
    fn conflicting_known_lowest_id_wins() {
        let p = probe(&[0, 1, 1, 0], 2);
        let clusters = ClusterAssignment {
            clusters: vec![0, 0, 1, 1],
            num_clusters: 2,
        };
        let known = [
            KnownLabel { instance_id: 10, label: 1 },
            KnownLabel { instance_id: 0, label: 0 },
        ];
        // Cluster 0 holds both; id 0 wins. Cluster 1 falls back to class 1.
        assert_eq!(assign_labels(&clusters, &known, &p), vec![0, 0, 1, 1]);
    }

    #[test]
    fn unlabeled_clusters_take_least_used_class() {
        let p = probe(&[0, 1, 2, 0], 3);
        let clusters = ClusterAssignment {
            clusters: vec![0, 1, 2, 2],
            num_clusters: 3,
        };
        let known = [KnownLabel { instance_id: 30, label: 1 }];
        assert_eq!(assign_labels(&clusters, &known, &p), vec![0, 2, 1, 1]);
    }

    #[test]
    fn per_cluster_knowledge_uses_most_central_member() {
        let p = probe(&[1, 0, 0, 1, 1], 2);
        let clusters = ClusterAssignment {
            clusters: vec![0, 0, 1, 1, 1],
            num_clusters: 2,
        };
        // Instance 3 co-occurs most with its cluster mates; cluster 0 is a tie.
        let sim = vec![
            vec![0.0, 0.5, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.2, 0.1],
            vec![0.0, 0.0, 0.2, 0.0, 0.9],
            vec![0.0, 0.0, 0.1, 0.9, 0.0],
        ];
        let known = cluster_known(&clusters, &sim, &p);
        assert_eq!(
            known,
            vec![
                KnownLabel { instance_id: 0, label: 1 },
                KnownLabel { instance_id: 30, label: 1 },
            ]
        );
        assert_eq!(assign_labels(&clusters, &known, &p), vec![1; 5]);
    }

    #[test]
    fn per_cluster_attack_never_inverts_pure_clusters() {
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let p = probe(&labels, 2);
        let leaves: Vec<Vec<u64>> = (0..2)
            .map(|c| p.ids.iter().zip(&labels).filter(|(_, &y)| y == c).map(|(&id, _)| id).collect())
            .collect();
        let trace = LeafTrace {
            trees: vec![TraceTree { tree_id: 0, leaves }],
        };
        for seed in 0..5 {
            let r = instance_clustering_attack(&trace, &p, None, &SpectralConfig::default(), seed).unwrap();
            assert_eq!(r.epsilon_p, 1.0);
        }
    }

    #[test]
    fn leakage_examples() {
        let p = probe(&[0, 0, 1, 1], 2);
        assert_eq!(leakage(&[0, 0, 1, 1], &p), 1.0);
        assert_eq!(leakage(&[0, 1, 0, 1], &p), 0.5);
        assert_eq!(leakage_or_floor(None, &probe(&[0, 1, 2], 3)), 1.0 / 3.0);
    }

    #[test]
    fn random_guessing_averages_one_over_c() {
        let c = 4;
        let labels: Vec<usize> = (0..40).map(|i| i % c).collect();
        let p = probe(&labels, c);
        let mut rng = seed::rng(11, &[]);
        let draws = 2000;
        let mean: f64 = (0..draws)
            .map(|_| {
                let guess: Vec<usize> = (0..labels.len()).map(|_| rng.gen_range(0..c)).collect();
                leakage(&guess, &p)
            })
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.25).abs() < 0.02, "{mean}");
    }

    #[test]
    fn fully_defended_trace_yields_floor() {
        let p = probe(&[0, 1, 0, 1], 2);
        let trace = LeafTrace {
            trees: vec![TraceTree { tree_id: 0, leaves: vec![] }],
        };
        let known = choose_known(&p, 1, 3).unwrap();
        let r = instance_clustering_attack(&trace, &p, Some(&known), &SpectralConfig::default(), 3).unwrap();
        assert_eq!(r.epsilon_p, 0.5);
        assert_eq!(r.n_trees, 0);
    }

    #[test]
    fn leaves_matching_classes_leak_everything() {
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let p = probe(&labels, 3);
        let leaves: Vec<Vec<u64>> = (0..3)
            .map(|c| p.ids.iter().zip(&labels).filter(|(_, &y)| y == c).map(|(&id, _)| id).collect())
            .collect();
        let trace = LeafTrace {
            trees: vec![TraceTree { tree_id: 0, leaves }],
        };
        let known = choose_known(&p, 1, 5).unwrap();
        let r = instance_clustering_attack(&trace, &p, Some(&known), &SpectralConfig::default(), 5).unwrap();
        assert_eq!(r.epsilon_p, 1.0);
        assert_eq!(r.per_class_accuracy, vec![1.0; 3]);
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["epsilon_p", "n_trees", "C", "N_pl", "per_class_accuracy", "seed"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
