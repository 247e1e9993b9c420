//! Two-party SecureBoost simulation.
//!
//! The active party holds labels and some features, the passive party holds
//! the remaining features. Homomorphic encryption is not performed; instead a
//! [`CostLedger`] counts the operations a Paillier-style deployment would
//! execute, and a [`LeafTrace`] records exactly the leaf partitions the
//! passive party gets to observe.

mod binning;
mod gradients;
mod ledger;
mod trace;
mod trainer;
mod tree;

pub use binning::{BinnedBlock, FeatureBins};
pub use gradients::{compute_gradients, sigmoid, softmax_in_place, GradientPair};
pub use ledger::{ledger_cost, CostLedger, UnitCosts};
pub use trace::{LeafTrace, TraceTree};
pub use trainer::{
    node_purity, train, train_with, FederatedView, Party, RoundMark, SplitDecision, TrainOutput,
};
pub use tree::{predict, predict_raw, BoostModel, Node, Scope, Tree, TreeStage};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One SecureBoost configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Federated boosting rounds.
    pub n_federated: usize,
    /// Local boosting rounds trained by the active party alone before
    /// federation starts. Zero disables the local-trees defense.
    pub n_local: usize,
    pub max_depth: usize,
    /// Per-tree instance subsample ratio.
    pub subsample: f64,
    /// Nodes whose purity reaches this threshold are grown by the active
    /// party alone.
    pub purity_threshold: f64,
    pub learning_rate: f64,
}

impl Hyperparameters {
    pub fn new(
        n_federated: usize,
        n_local: usize,
        max_depth: usize,
        subsample: f64,
        purity_threshold: f64,
        learning_rate: f64,
    ) -> Self {
        Self {
            n_federated,
            n_local,
            max_depth,
            subsample,
            purity_threshold,
            learning_rate,
        }
    }

    /// Checks the ranges the trainer can honour. These are wider than the
    /// search space so that baseline presets (20 federated rounds) and the
    /// undefended setting (no local rounds) remain expressible.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_federated == 0 {
            return fail("n_federated must be at least 1".into());
        }
        if !(1..=Self::MAX_DEPTH).contains(&self.max_depth) {
            return fail(format!("max_depth {} outside [1, {}]", self.max_depth, Self::MAX_DEPTH));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return fail(format!("subsample {} outside (0, 1]", self.subsample));
        }
        if !(self.purity_threshold > 0.0 && self.purity_threshold <= 1.0) {
            return fail(format!("purity_threshold {} outside (0, 1]", self.purity_threshold));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        Ok(())
    }

    pub const MAX_DEPTH: usize = 16;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Binary,
    Multiclass(usize),
}

impl Task {
    pub fn from_classes(num_classes: usize) -> Self {
        if num_classes == 2 {
            Task::Binary
        } else {
            Task::Multiclass(num_classes)
        }
    }

    /// Raw scores per instance: one for binary, one per class otherwise.
    pub fn num_outputs(&self) -> usize {
        match *self {
            Task::Binary => 1,
            Task::Multiclass(c) => c,
        }
    }

    pub fn num_classes(&self) -> usize {
        match *self {
            Task::Binary => 2,
            Task::Multiclass(c) => c,
        }
    }
}

/// Trainer settings that are not searched over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum gain for a split.
    pub gamma: f64,
    /// Minimum hessian sum on each side of a split.
    pub min_child_weight: f64,
    pub max_bins: usize,
    pub unit_costs: UnitCosts,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 0.0,
            max_bins: 32,
            unit_costs: UnitCosts::default(),
        }
    }
}
