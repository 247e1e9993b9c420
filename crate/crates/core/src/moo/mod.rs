//! Constrained NSGA-II building blocks: genome coding, variation, penalties,
//! non-dominated sorting, crowding, selection and hypervolume.

mod front;
mod genome;
mod hypervolume;
mod objectives;
mod sorting;
mod variation;

pub use front::{is_mutually_non_dominated, pareto_front, read_front_csv, write_front_csv, Solution};
pub use genome::{Genome, RealRange, SearchSpace, BINARY_LEN, BINARY_THETA_RANGE, REAL_RANGES};
pub use hypervolume::hypervolume;
pub use objectives::{penalize, Constraints, ObjectiveTriple};
pub use sorting::{
    crowding_distance, dominates, fitness, non_dominated_sort, ranks, select, tournament, Fitness,
};
pub use variation::{crossover, mutate, polynomial_mutation, sbx, vary, VariationConfig};
