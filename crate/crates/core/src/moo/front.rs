use std::path::Path;

use serde::{Deserialize, Serialize};

use super::objectives::ObjectiveTriple;
use super::sorting::{dominates, ranks};
use crate::error::{Error, Result};
use crate::secureboost::Hyperparameters;

/// An evaluated configuration with its non-domination rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub id: u64,
    pub hyperparameters: Hyperparameters,
    pub objectives: ObjectiveTriple,
    pub rank: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrontRow {
    solution_id: u64,
    n_f: usize,
    n_l: usize,
    d: usize,
    r: f64,
    theta_p: f64,
    eta: f64,
    eps_u: f64,
    eps_c: f64,
    eps_p: f64,
    penalized_u: f64,
    penalized_c: f64,
    penalized_p: f64,
    rank: usize,
}

impl From<&Solution> for FrontRow {
    fn from(s: &Solution) -> Self {
        let hp = &s.hyperparameters;
        let o = &s.objectives;
        FrontRow {
            solution_id: s.id,
            n_f: hp.n_federated,
            n_l: hp.n_local,
            d: hp.max_depth,
            r: hp.subsample,
            theta_p: hp.purity_threshold,
            eta: hp.learning_rate,
            eps_u: o.raw[0],
            eps_c: o.raw[1],
            eps_p: o.raw[2],
            penalized_u: o.penalized[0],
            penalized_c: o.penalized[1],
            penalized_p: o.penalized[2],
            rank: s.rank,
        }
    }
}

impl From<FrontRow> for Solution {
    fn from(r: FrontRow) -> Self {
        Solution {
            id: r.solution_id,
            hyperparameters: Hyperparameters::new(r.n_f, r.n_l, r.d, r.r, r.theta_p, r.eta),
            objectives: ObjectiveTriple {
                raw: [r.eps_u, r.eps_c, r.eps_p],
                penalized: [r.penalized_u, r.penalized_c, r.penalized_p],
            },
            rank: r.rank,
        }
    }
}

/// Mutually non-dominated members of `solutions` (on penalized objectives),
/// in input order, with rank 0.
pub fn pareto_front(solutions: &[Solution]) -> Vec<Solution> {
    let points: Vec<[f64; 3]> = solutions.iter().map(|s| s.objectives.penalized).collect();
    let rank = ranks(&points);
    solutions
        .iter()
        .zip(rank)
        .filter(|(_, r)| *r == 0)
        .map(|(s, _)| Solution { rank: 0, ..*s })
        .collect()
}

pub fn is_mutually_non_dominated(solutions: &[Solution]) -> bool {
    solutions.iter().all(|a| {
        solutions
            .iter()
            .all(|b| !dominates(&a.objectives.penalized, &b.objectives.penalized))
    })
}

pub fn write_front_csv(path: impl AsRef<Path>, solutions: &[Solution]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for s in solutions {
        w.serialize(FrontRow::from(s))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_front_csv(path: impl AsRef<Path>) -> Result<Vec<Solution>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    r.deserialize::<FrontRow>()
        .enumerate()
        .map(|(i, row)| {
            row.map(Solution::from).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}
