use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::pool::evaluate_all;
use super::sbo::{EvalContext, EvaluationRecord};
use crate::error::{Error, Result};
use crate::moo::{pareto_front, Solution};
use crate::secureboost::Hyperparameters;
use crate::seed::{self, stream};

/// A named default configuration from common VFL frameworks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: &'static str,
    pub hyperparameters: Hyperparameters,
}

/// FATE, VF²Boost and their average, each with one local tree and no purity
/// gate.
pub fn presets() -> [Preset; 3] {
    [
        Preset {
            name: "FATE",
            hyperparameters: Hyperparameters::new(5, 1, 3, 0.8, 1.0, 0.3),
        },
        Preset {
            name: "VF2Boost",
            hyperparameters: Hyperparameters::new(20, 1, 7, 0.8, 1.0, 0.1),
        },
        Preset {
            name: "Average",
            hyperparameters: Hyperparameters::new(10, 1, 5, 0.8, 1.0, 0.3),
        },
    ]
}

pub fn empirical_baseline(ctx: &EvalContext, seed: u64, jobs: usize) -> Result<Vec<EvaluationRecord>> {
    let hps: Vec<Hyperparameters> = presets().iter().map(|p| p.hyperparameters).collect();
    let mut records = evaluate_all(&hps, ctx, seed, jobs)?;
    for (i, r) in records.iter_mut().enumerate() {
        r.solution_id = i as u64;
    }
    Ok(records)
}

/// Values per axis of the exhaustive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_federated: Vec<usize>,
    pub n_local: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub subsample: Vec<f64>,
    pub purity_threshold: Vec<f64>,
    pub learning_rate: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_federated: vec![1, 4, 8, 16],
            n_local: vec![1, 4, 8],
            max_depth: vec![2, 4, 6, 8],
            subsample: vec![0.5, 0.8],
            purity_threshold: vec![0.7, 0.9, 1.0],
            learning_rate: vec![0.05, 0.1, 0.3],
        }
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.n_federated.len()
            * self.n_local.len()
            * self.max_depth.len()
            * self.subsample.len()
            * self.purity_threshold.len()
            * self.learning_rate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every combination, last axis varying fastest.
    pub fn points(&self) -> Vec<Hyperparameters> {
        let mut out = Vec::with_capacity(self.len());
        for &n_f in &self.n_federated {
            for &n_l in &self.n_local {
                for &d in &self.max_depth {
                    for &r in &self.subsample {
                        for &theta in &self.purity_threshold {
                            for &eta in &self.learning_rate {
                                out.push(Hyperparameters::new(n_f, n_l, d, r, theta, eta));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Grid points in seeded random order, truncated to `budget` when given.
pub fn grid_points(spec: &GridSpec, budget: Option<usize>, seed: u64) -> Vec<Hyperparameters> {
    let mut points = spec.points();
    points.shuffle(&mut seed::rng(seed, &[stream::GRID]));
    if let Some(b) = budget {
        points.truncate(b);
    }
    points
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub records: Vec<EvaluationRecord>,
    pub front: Vec<Solution>,
}

pub fn grid_search(
    spec: &GridSpec,
    ctx: &EvalContext,
    seed: u64,
    budget: Option<usize>,
    jobs: usize,
) -> Result<GridResult> {
    if spec.is_empty() {
        return Err(Error::InvalidArgument("grid has an empty axis".into()));
    }
    let points = grid_points(spec, budget, seed);
    let mut records = evaluate_all(&points, ctx, seed, jobs)?;
    for (i, r) in records.iter_mut().enumerate() {
        r.solution_id = i as u64;
    }
    let solutions: Vec<Solution> = records
        .iter()
        .filter(|r| !r.failed)
        .map(|r| Solution {
            id: r.solution_id,
            hyperparameters: r.hyperparameters,
            objectives: r.objectives(),
            rank: 0,
        })
        .collect();
    Ok(GridResult {
        front: pareto_front(&solutions),
        records,
    })
}
