//! Experiment orchestration: replicated runs, the counterexample start
//! state, the drift probe, the exact transition oracle, scaling sweeps and
//! artifact persistence.

pub mod counterexample;
pub mod drift;
pub mod experiment;
pub mod io;
pub mod oracle;
pub mod record;
pub mod runner;
pub mod sweep;

pub use counterexample::{build_counterexample, counterexample_values};
pub use drift::{estimate_drift, DriftEstimate, DriftProbeConfig, DriftTally};
pub use experiment::{
    run_replications, run_single, AlgorithmKind, ExperimentConfig, InitSpec, Representation,
};
pub use oracle::{exact_transition_oracle, monte_carlo_successors, total_variation};
pub use record::{Milestone, Milestones, ProfileSample, StopReason, TrajectoryRecord};
pub use runner::{run_trajectory, RunOptions, Stepper, StopRule, StopTarget};
pub use sweep::{scaling_sweep, SweepRow};
