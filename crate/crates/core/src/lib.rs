//! Simulation laboratory for steady-state SPEA2 and NSGA-II on OneMinMax.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: genotypes, objective values, dominance and populations.
//! * [`variation`]: the seeded random source and the mutation operators.
//! * [`spread`]: interval profiles and the optimal-spread target.
//! * [`spea2`] and [`nsga2`]: survival machinery and iteration loops.
//! * [`invariants`]: online monitors over consecutive iterations.
//! * [`harness`]: replicated experiments, the counterexample start state,
//!   the drift probe, the exact transition oracle and scaling sweeps.

pub mod error;
pub mod harness;
pub mod invariants;
pub mod model;
pub mod nsga2;
pub mod spea2;
pub mod spread;
pub mod variation;

pub use error::{LabError, Result};
pub use model::{
    compare_dominance, evaluate_omm, DominanceRelation, Genotype, Individual, ObjectiveValue,
    OnesCount, Population, StepEvent,
};
pub use spread::{alpha_beta, interval_profile, is_optimal_spread, AlphaBeta, IntervalProfile};
pub use variation::{MutationKind, RandomSource};
