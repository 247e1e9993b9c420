use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::gradients::{sigmoid, softmax_in_place};
use super::trainer::Party;
use super::Task;
use crate::error::{Error, Result};

/// Who grew a node: jointly under the federated protocol, or the active
/// party alone (local trees and purity-gated subtrees).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Federated,
    ActiveLocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        party: Party,
        /// Column index within the owning party's block.
        feature: usize,
        bin: usize,
        /// Rows with `x <= threshold` go left.
        threshold: f64,
        gain: f64,
        scope: Scope,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        weight: f64,
        scope: Scope,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.num_leaves() + right.num_leaves(),
        }
    }

    /// Index of the leaf reached by a row, counting leaves left to right.
    pub fn leaf_index(&self, active: ArrayView1<f64>, passive: ArrayView1<f64>) -> usize {
        let mut node = self;
        let mut offset = 0;
        loop {
            match node {
                Node::Leaf { .. } => return offset,
                Node::Split {
                    party,
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let x = match party {
                        Party::Active => active[*feature],
                        Party::Passive => passive[*feature],
                    };
                    if x <= *threshold {
                        node = left;
                    } else {
                        offset += left.num_leaves();
                        node = right;
                    }
                }
            }
        }
    }

    pub fn value(&self, active: ArrayView1<f64>, passive: ArrayView1<f64>) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { weight, .. } => return *weight,
                Node::Split {
                    party,
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let x = match party {
                        Party::Active => active[*feature],
                        Party::Passive => passive[*feature],
                    };
                    node = if x <= *threshold { left } else { right };
                }
            }
        }
    }

    /// True when no split in this subtree belongs to the passive party.
    pub fn is_active_only(&self) -> bool {
        match self {
            Node::Leaf { .. } => true,
            Node::Split {
                party, left, right, ..
            } => *party == Party::Active && left.is_active_only() && right.is_active_only(),
        }
    }

    /// Every `ActiveLocal` node has only active-party splits beneath it.
    pub fn local_scopes_are_closed(&self) -> bool {
        match self {
            Node::Leaf { .. } => true,
            Node::Split {
                scope, left, right, ..
            } => {
                if *scope == Scope::ActiveLocal {
                    self.is_active_only()
                } else {
                    left.local_scopes_are_closed() && right.local_scopes_are_closed()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeStage {
    Local,
    Federated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub stage: TreeStage,
    /// Score column this tree contributes to (always 0 for binary tasks).
    pub output: usize,
    pub root: Node,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub task: Task,
    pub base_score: f64,
    pub learning_rate: f64,
    pub num_active: usize,
    pub num_passive: usize,
    pub local_trees: Vec<Tree>,
    pub federated_trees: Vec<Tree>,
}

impl BoostModel {
    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.local_trees.iter().chain(&self.federated_trees)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_dims(model: &BoostModel, active: &Array2<f64>, passive: &Array2<f64>) -> Result<()> {
    if active.ncols() != model.num_active {
        return Err(Error::DimensionMismatch {
            party: "active",
            expected: model.num_active,
            actual: active.ncols(),
        });
    }
    if passive.ncols() != model.num_passive {
        return Err(Error::DimensionMismatch {
            party: "passive",
            expected: model.num_passive,
            actual: passive.ncols(),
        });
    }
    if active.nrows() != passive.nrows() {
        return Err(Error::Dataset(format!(
            "party blocks have {} and {} rows",
            active.nrows(),
            passive.nrows()
        )));
    }
    Ok(())
}

/// Raw scores `base + η Σ tree outputs`, shape `n × outputs`.
pub fn predict_raw(model: &BoostModel, active: &Array2<f64>, passive: &Array2<f64>) -> Result<Array2<f64>> {
    check_dims(model, active, passive)?;
    let n = active.nrows();
    let mut scores = Array2::from_elem((n, model.task.num_outputs()), model.base_score);
    for tree in model.trees() {
        for i in 0..n {
            scores[[i, tree.output]] +=
                model.learning_rate * tree.root.value(active.row(i), passive.row(i));
        }
    }
    Ok(scores)
}

/// Class probabilities, shape `n × C` (two columns for binary tasks).
pub fn predict(model: &BoostModel, active: &Array2<f64>, passive: &Array2<f64>) -> Result<Array2<f64>> {
    let raw = predict_raw(model, active, passive)?;
    let n = raw.nrows();
    let c = model.task.num_classes();
    let mut probs = Array2::zeros((n, c));
    match model.task {
        Task::Binary => {
            for i in 0..n {
                let p = sigmoid(raw[[i, 0]]);
                probs[[i, 0]] = 1.0 - p;
                probs[[i, 1]] = p;
            }
        }
        Task::Multiclass(_) => {
            let mut row = vec![0.0; c];
            for i in 0..n {
                row.iter_mut().zip(raw.row(i)).for_each(|(r, &s)| *r = s);
                softmax_in_place(&mut row);
                probs.row_mut(i).iter_mut().zip(&row).for_each(|(p, &r)| *p = r);
            }
        }
    }
    Ok(probs)
}
