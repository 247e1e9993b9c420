use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::binning::BinnedBlock;
use super::gradients::compute_gradients;
use super::ledger::CostLedger;
use super::trace::{LeafTrace, TraceTree};
use super::tree::{BoostModel, Node, Scope, Tree, TreeStage};
use super::{Hyperparameters, Task, TrainerConfig};
use crate::data::VerticalDataset;
use crate::error::{Error, Result};
use crate::seed::{self, stream};

/// Feature owner. The derive order doubles as the split tie-break: active
/// party candidates win ties against passive ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Active,
    Passive,
}

/// Fraction of the majority class among `labels`.
pub fn node_purity(labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInstanceSet);
    }
    let mut counts = std::collections::HashMap::new();
    for &y in labels {
        *counts.entry(y).or_insert(0usize) += 1;
    }
    let majority = counts.values().copied().max().unwrap_or(0);
    Ok(majority as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecision {
    pub party: Party,
    pub feature: usize,
    pub bin: usize,
    pub threshold: f64,
    pub gain: f64,
    /// Row positions going left / right, in ascending order.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Both parties' quantized features over one training set.
#[derive(Debug, Clone)]
pub struct FederatedView {
    pub active: BinnedBlock,
    pub passive: BinnedBlock,
}

#[derive(Default, Clone, Copy)]
struct BinStat {
    g: f64,
    h: f64,
    n: usize,
}

impl FederatedView {
    pub fn new(train: &VerticalDataset, max_bins: usize) -> Self {
        Self {
            active: BinnedBlock::fit(train.active_features(), max_bins),
            passive: BinnedBlock::fit(train.passive_features(), max_bins),
        }
    }

    fn block(&self, party: Party) -> &BinnedBlock {
        match party {
            Party::Active => &self.active,
            Party::Passive => &self.passive,
        }
    }

    /// Best regularized second-order split of `rows` over every bin boundary
    /// of every feature. Passive features are only considered when
    /// `ledger` is given; their histograms are charged to it as encrypted
    /// additions and per-bin decryptions. Returns `None` when no candidate
    /// has positive gain.
    pub fn find_split(
        &self,
        rows: &[usize],
        grad: &[f64],
        hess: &[f64],
        cfg: &TrainerConfig,
        mut ledger: Option<&mut CostLedger>,
    ) -> Option<SplitDecision> {
        let lambda = cfg.lambda;
        let (g_total, h_total) = rows
            .iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + grad[r], h + hess[r]));
        let parent_score = g_total * g_total / (h_total + lambda);

        let mut best: Option<(Party, usize, usize, f64)> = None;
        let mut hist: Vec<BinStat> = Vec::new();
        for party in [Party::Active, Party::Passive] {
            if party == Party::Passive && ledger.is_none() {
                continue;
            }
            let block = self.block(party);
            for (feature, codes) in block.codes.iter().enumerate() {
                let nbins = block.bins[feature].num_bins();
                if let (Party::Passive, Some(ledger)) = (party, ledger.as_deref_mut()) {
                    ledger.record_additions(2 * rows.len() as u64);
                    ledger.record_decryptions(2 * nbins as u64);
                }
                hist.clear();
                hist.resize(nbins, BinStat::default());
                for &r in rows {
                    let s = &mut hist[codes[r] as usize];
                    s.g += grad[r];
                    s.h += hess[r];
                    s.n += 1;
                }
                let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
                for (bin, s) in hist[..nbins - 1].iter().enumerate() {
                    gl += s.g;
                    hl += s.h;
                    nl += s.n;
                    if nl == 0 || nl == rows.len() {
                        continue;
                    }
                    let gr = g_total - gl;
                    let hr = h_total - hl;
                    if hl < cfg.min_child_weight || hr < cfg.min_child_weight {
                        continue;
                    }
                    let gain = 0.5
                        * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score)
                        - cfg.gamma;
                    if best.map_or(true, |(.., g)| gain > g) {
                        best = Some((party, feature, bin, gain));
                    }
                }
            }
        }

        let (party, feature, bin, gain) = best?;
        if gain <= 0.0 {
            return None;
        }
        let block = self.block(party);
        let codes = &block.codes[feature];
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| codes[r] as usize <= bin);
        Some(SplitDecision {
            party,
            feature,
            bin,
            threshold: block.bins[feature].threshold(bin),
            gain,
            left,
            right,
        })
    }
}

/// Ledger and trace size right after a federated boosting round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMark {
    pub ledger: CostLedger,
    /// Number of trace trees accumulated so far.
    pub trace_trees: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: BoostModel,
    pub ledger: CostLedger,
    pub trace: LeafTrace,
    /// One entry per federated round.
    pub rounds: Vec<RoundMark>,
}

struct Grower<'a> {
    view: &'a FederatedView,
    cfg: &'a TrainerConfig,
    labels: &'a [usize],
    ids: &'a [u64],
    grad: &'a [f64],
    hess: &'a [f64],
    max_depth: usize,
    purity_threshold: f64,
    ledger: &'a mut CostLedger,
    recorded: Vec<Vec<u64>>,
}

impl Grower<'_> {
    fn leaf_weight(&self, rows: &[usize]) -> f64 {
        let (g, h) = rows
            .iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + self.grad[r], h + self.hess[r]));
        -g / (h + self.cfg.lambda)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, mut scope: Scope) -> Node {
        let labels: Vec<usize> = rows.iter().map(|&r| self.labels[r]).collect();
        let purity = node_purity(&labels).expect("rows non-empty");
        // Pure nodes are leaves.
        let splittable = depth < self.max_depth && rows.len() >= 2 && purity < 1.0;
        if scope == Scope::Federated && splittable {
            if purity >= self.purity_threshold {
                // Below the root the parent's federated split already revealed
                // this instance set; only the finer partitions stay hidden.
                if depth > 0 {
                    self.recorded.push(rows.iter().map(|&r| self.ids[r]).collect());
                }
                scope = Scope::ActiveLocal;
            }
        }

        let decision = if splittable {
            let ledger = (scope == Scope::Federated).then_some(&mut *self.ledger);
            self.view
                .find_split(&rows, self.grad, self.hess, self.cfg, ledger)
        } else {
            None
        };

        match decision {
            None => {
                if scope == Scope::Federated {
                    self.recorded.push(rows.iter().map(|&r| self.ids[r]).collect());
                }
                Node::Leaf {
                    weight: self.leaf_weight(&rows),
                    scope,
                }
            }
            Some(split) => {
                let left = Box::new(self.grow(split.left, depth + 1, scope));
                let right = Box::new(self.grow(split.right, depth + 1, scope));
                Node::Split {
                    party: split.party,
                    feature: split.feature,
                    bin: split.bin,
                    threshold: split.threshold,
                    gain: split.gain,
                    scope,
                    left,
                    right,
                }
            }
        }
    }
}

/// `ceil(r * n)` distinct rows in ascending order.
fn subsample(n: usize, ratio: f64, seed: u64, tree_index: usize) -> Vec<usize> {
    let k = ((ratio * n as f64).ceil() as usize).clamp(1, n);
    if k == n {
        return (0..n).collect();
    }
    let mut rng = seed::rng(seed, &[stream::SUBSAMPLE, tree_index as u64]);
    let mut rows = index::sample(&mut rng, n, k).into_vec();
    rows.sort_unstable();
    rows
}

pub fn train(hp: &Hyperparameters, train_set: &VerticalDataset, seed: u64) -> Result<TrainOutput> {
    train_with(hp, train_set, seed, &TrainerConfig::default())
}

/// Local stage (`n_local` active-only rounds) followed by the federated stage
/// (`n_federated` rounds). Multiclass tasks grow one tree per class per round.
pub fn train_with(
    hp: &Hyperparameters,
    train_set: &VerticalDataset,
    seed: u64,
    cfg: &TrainerConfig,
) -> Result<TrainOutput> {
    hp.validate()?;
    if train_set.is_empty() {
        return Err(Error::Dataset("training set is empty".into()));
    }
    let task = Task::from_classes(train_set.num_classes());
    let outputs = task.num_outputs();
    let n = train_set.len();
    let view = FederatedView::new(train_set, cfg.max_bins);
    let active = train_set.active_features();
    let passive = train_set.passive_features();

    let base_score = 0.0;
    let mut scores = vec![base_score; n * outputs];
    let mut ledger = CostLedger::new(cfg.unit_costs);
    let mut trace = LeafTrace::default();
    let mut rounds = Vec::with_capacity(hp.n_federated);
    let mut local_trees = Vec::with_capacity(hp.n_local * outputs);
    let mut federated_trees = Vec::with_capacity(hp.n_federated * outputs);
    let mut tree_index = 0usize;

    let stages = std::iter::repeat(TreeStage::Local)
        .take(hp.n_local)
        .chain(std::iter::repeat(TreeStage::Federated).take(hp.n_federated));
    for stage in stages {
        let gp = compute_gradients(&scores, train_set.labels(), task);
        let mut round = Vec::with_capacity(outputs);
        for output in 0..outputs {
            let (grad, hess) = gp.column(output);
            let rows = subsample(n, hp.subsample, seed, tree_index);
            tree_index += 1;
            let scope = match stage {
                TreeStage::Local => Scope::ActiveLocal,
                TreeStage::Federated => {
                    ledger.record_encryptions(2 * rows.len() as u64);
                    Scope::Federated
                }
            };
            let mut grower = Grower {
                view: &view,
                cfg,
                labels: train_set.labels(),
                ids: train_set.instance_ids(),
                grad: &grad,
                hess: &hess,
                max_depth: hp.max_depth,
                purity_threshold: hp.purity_threshold,
                ledger: &mut ledger,
                recorded: Vec::new(),
            };
            let root = grower.grow(rows, 0, scope);
            if stage == TreeStage::Federated {
                trace.trees.push(TraceTree {
                    tree_id: trace.trees.len(),
                    leaves: grower.recorded,
                });
            }
            round.push(Tree {
                stage,
                output,
                root,
            });
        }
        for tree in &round {
            for i in 0..n {
                scores[i * outputs + tree.output] +=
                    hp.learning_rate * tree.root.value(active.row(i), passive.row(i));
            }
        }
        match stage {
            TreeStage::Local => local_trees.extend(round),
            TreeStage::Federated => {
                federated_trees.extend(round);
                rounds.push(RoundMark {
                    ledger,
                    trace_trees: trace.trees.len(),
                });
            }
        }
    }

    let model = BoostModel {
        task,
        base_score,
        learning_rate: hp.learning_rate,
        num_active: train_set.num_active(),
        num_passive: train_set.num_passive(),
        local_trees,
        federated_trees,
    };
    Ok(TrainOutput {
        model,
        ledger,
        trace,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::data::gen_synthetic;
    use crate::secureboost::predict;
    use ndarray::Array2;

    fn dataset(active: Vec<f64>, passive: Vec<f64>, labels: Vec<usize>) -> VerticalDataset {
        let n = labels.len();
        let na = active.len() / n;
        let np = passive.len() / n;
        VerticalDataset::new(
            Array2::from_shape_vec((n, na), active).unwrap(),
            Array2::from_shape_vec((n, np), passive).unwrap(),
            labels,
            2,
            (0..n as u64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn purity() {
        assert!((node_purity(&[1, 1, 0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(node_purity(&[4, 4, 4]).unwrap(), 1.0);
        assert_eq!(node_purity(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap(), 0.5);
        assert!(matches!(node_purity(&[]), Err(Error::EmptyInstanceSet)));
    }

    #[test]
    fn separating_passive_feature_is_chosen() {
        // active feature is noise, passive feature separates the classes
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1];
        let active = vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
        let passive: Vec<f64> = labels.iter().map(|&y| y as f64 * 10.0).collect();
        let ds = dataset(active, passive, labels.clone());
        let view = FederatedView::new(&ds, 32);
        let gp = compute_gradients(&vec![0.0; 8], &labels, Task::Binary);
        let mut ledger = CostLedger::default();
        let rows: Vec<usize> = (0..8).collect();
        let split = view
            .find_split(&rows, &gp.grad, &gp.hess, &TrainerConfig::default(), Some(&mut ledger))
            .unwrap();
        assert_eq!(split.party, Party::Passive);
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 0.0);
        assert_eq!(split.left, vec![0, 2, 4, 6]);
    }

    #[test]
    fn identical_rows_do_not_split() {
        let labels = vec![0, 1, 0, 1];
        let ds = dataset(vec![1.0; 4], vec![2.0; 4], labels.clone());
        let view = FederatedView::new(&ds, 32);
        let gp = compute_gradients(&[0.0; 4], &labels, Task::Binary);
        let split = view.find_split(
            &[0, 1, 2, 3],
            &gp.grad,
            &gp.hess,
            &TrainerConfig::default(),
            Some(&mut CostLedger::default()),
        );
        assert!(split.is_none());
    }

    #[test]
    fn histogram_charges_follow_cost_model() {
        // 100 rows with distinct values => 32 bins per passive feature
        let n = 100;
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let active: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let passive: Vec<f64> = (0..n * 5).map(|i| ((i * 37) % 101) as f64).collect();
        let ds = dataset(active, passive, labels.clone());
        let view = FederatedView::new(&ds, 32);
        assert!(view.passive.bins.iter().all(|b| b.num_bins() == 32));
        let gp = compute_gradients(&vec![0.0; n], &labels, Task::Binary);
        let mut ledger = CostLedger::default();
        let rows: Vec<usize> = (0..n).collect();
        view.find_split(&rows, &gp.grad, &gp.hess, &TrainerConfig::default(), Some(&mut ledger));
        assert_eq!(ledger.c_add, 2 * 100 * 5);
        assert_eq!(ledger.c_dec, 2 * 32 * 5);
        assert_eq!(ledger.c_enc, 0);
    }

    #[test]
    fn full_purity_gate_keeps_everything_local() {
        let ds = gen_synthetic(300, 3, 3, 2, 1.0, 1).unwrap();
        let hp = Hyperparameters::new(4, 0, 4, 0.8, 0.1, 0.3);
        let out = train(&hp, &ds, 5).unwrap();
        assert!(out.trace.is_empty());
        assert_eq!(out.trace.trees.len(), 4);
        assert_eq!((out.ledger.c_add, out.ledger.c_dec), (0, 0));
        assert_eq!(out.ledger.c_enc, 4 * 2 * 240);
        for tree in &out.model.federated_trees {
            assert!(tree.root.is_active_only());
        }
    }

    #[test]
    fn local_trees_never_use_passive_features() {
        let ds = gen_synthetic(300, 2, 4, 3, 1.0, 2).unwrap();
        let hp = Hyperparameters::new(2, 3, 4, 1.0, 1.0, 0.3);
        let out = train(&hp, &ds, 5).unwrap();
        assert_eq!(out.model.local_trees.len(), 3 * 3);
        assert_eq!(out.model.federated_trees.len(), 2 * 3);
        assert_eq!(out.trace.trees.len(), 6);
        assert!(out.model.local_trees.iter().all(|t| t.root.is_active_only()));
        for tree in out.model.trees() {
            assert!(tree.root.depth() <= 4);
            assert!(tree.root.local_scopes_are_closed());
        }
    }

    #[test]
    fn trace_is_a_partition_of_the_subsample() {
        let ds = gen_synthetic(400, 3, 3, 2, 2.0, 3).unwrap();
        let hp = Hyperparameters::new(5, 1, 5, 0.7, 0.9, 0.2);
        let out = train(&hp, &ds, 9).unwrap();
        let k = (0.7f64 * 400.0).ceil() as usize;
        for tree in &out.trace.trees {
            let mut seen = HashSet::new();
            for leaf in &tree.leaves {
                for id in leaf {
                    assert!(seen.insert(*id), "instance {id} recorded twice");
                }
            }
            assert!(seen.len() <= k);
        }
    }

    /// Nodes the passive party observes: federated leaves and the roots of
    /// gated subtrees hanging off a federated split.
    fn visible_sets(node: &Node, under_federated_split: bool) -> usize {
        match node {
            Node::Leaf { scope: Scope::Federated, .. } => 1,
            Node::Split { scope: Scope::Federated, left, right, .. } => {
                visible_sets(left, true) + visible_sets(right, true)
            }
            _ => usize::from(under_federated_split),
        }
    }

    #[test]
    fn gated_subtrees_reveal_only_their_root_set() {
        let ds = gen_synthetic(400, 3, 3, 2, 1.5, 6).unwrap();
        let hp = Hyperparameters::new(6, 0, 6, 1.0, 0.8, 0.3);
        let out = train(&hp, &ds, 2).unwrap();
        let mut gated = 0;
        for (tree, recorded) in out.model.federated_trees.iter().zip(&out.trace.trees) {
            assert_eq!(recorded.leaves.len(), visible_sets(&tree.root, false));
            assert!(tree.root.local_scopes_are_closed());
            gated += usize::from(!matches!(tree.root, Node::Leaf { .. }));
        }
        assert!(gated > 0);
    }

    #[test]
    fn zero_noise_fits_perfectly() {
        let ds = gen_synthetic(400, 2, 2, 4, 0.0, 8).unwrap();
        let hp = Hyperparameters::new(10, 0, 2, 1.0, 1.0, 0.3);
        let out = train(&hp, &ds, 1).unwrap();
        let probs = predict(&out.model, ds.active_features(), ds.passive_features()).unwrap();
        for (row, &y) in probs.outer_iter().zip(ds.labels()) {
            let argmax = (0..4).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(argmax, y);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = gen_synthetic(300, 3, 3, 2, 1.5, 4).unwrap();
        let hp = Hyperparameters::new(6, 2, 5, 0.6, 0.85, 0.1);
        let a = train(&hp, &ds, 77).unwrap();
        let b = train(&hp, &ds, 77).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.ledger, b.ledger);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.rounds, b.rounds);
    }

    #[test]
    fn rounds_track_monotone_ledger() {
        let ds = gen_synthetic(200, 3, 3, 2, 1.5, 4).unwrap();
        let hp = Hyperparameters::new(5, 0, 3, 0.8, 1.0, 0.1);
        let out = train(&hp, &ds, 3).unwrap();
        assert_eq!(out.rounds.len(), 5);
        for w in out.rounds.windows(2) {
            assert!(w[1].ledger.c_enc > w[0].ledger.c_enc);
            assert!(w[1].ledger.c_add >= w[0].ledger.c_add);
            assert_eq!(w[1].trace_trees, w[0].trace_trees + 1);
        }
        assert_eq!(out.rounds.last().unwrap().ledger, out.ledger);
    }
}
