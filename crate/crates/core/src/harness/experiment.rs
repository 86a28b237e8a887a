//! Replicated experiments: one configuration, many seeds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::counterexample::{counterexample_size, counterexample_values};
use crate::harness::drift::DriftProbeConfig;
use crate::harness::record::TrajectoryRecord;
use crate::harness::runner::{run_trajectory, RunOptions, Stepper, StopRule, StopTarget};
use crate::model::{Genotype, Individual, OnesCount, Population};
use crate::nsga2::Nsga2Config;
use crate::spea2::{DistanceMetric, Spea2Config};
use crate::variation::{MutationKind, RandomSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "spea2-ss")]
    Spea2SteadyState,
    #[serde(rename = "spea2-gen")]
    Spea2Generational,
    #[serde(rename = "nsga2-classic")]
    Nsga2Classic,
    #[serde(rename = "nsga2-ss")]
    Nsga2SteadyState,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::Spea2SteadyState,
        AlgorithmKind::Spea2Generational,
        AlgorithmKind::Nsga2Classic,
        AlgorithmKind::Nsga2SteadyState,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmKind::Spea2SteadyState => "spea2-ss",
            AlgorithmKind::Spea2Generational => "spea2-gen",
            AlgorithmKind::Nsga2Classic => "nsga2-classic",
            AlgorithmKind::Nsga2SteadyState => "nsga2-ss",
        }
    }

    pub fn is_steady_state(&self) -> bool {
        matches!(self, AlgorithmKind::Spea2SteadyState | AlgorithmKind::Nsga2SteadyState)
    }

    pub fn is_spea2(&self) -> bool {
        matches!(self, AlgorithmKind::Spea2SteadyState | AlgorithmKind::Spea2Generational)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| LabError::config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitSpec {
    /// Independent uniform bitstrings.
    #[default]
    Uniform,
    /// The start state with two odd gaps of lengths `c+1` and `c-1`.
    Counterexample { c: usize },
    /// Prefix genotypes with the given ones-counts, in the given order.
    Values { values: Vec<u64> },
}

/// How genotypes are stored. Both give the same objective-value process;
/// ones-counts are much cheaper for large `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    #[default]
    Bitstring,
    OnesCount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmKind,
    pub n: usize,
    /// `mu` for SPEA2, `N` for NSGA-II.
    pub mu: usize,
    /// Offspring per generation of `spea2-gen`; defaults to `mu`. Fixed by
    /// the other algorithms.
    #[serde(default)]
    pub lambda: Option<usize>,
    pub mutation: MutationKind,
    #[serde(default)]
    pub metric: DistanceMetric,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub monitors: bool,
    #[serde(default)]
    pub sample_every: Option<u64>,
    #[serde(default)]
    pub drift_probe: bool,
    #[serde(default)]
    pub representation: Representation,
}

impl ExperimentConfig {
    /// Steady-state SPEA2 with one-bit mutation from a uniform start, run to
    /// optimal spread with monitors on.
    pub fn new(algorithm: AlgorithmKind, n: usize, mu: usize) -> Self {
        ExperimentConfig {
            algorithm,
            n,
            mu,
            lambda: None,
            mutation: MutationKind::OneBit,
            metric: DistanceMetric::FirstObjectiveAbsolute,
            init: InitSpec::Uniform,
            stop: StopRule::default(),
            seeds: Vec::new(),
            monitors: true,
            sample_every: None,
            drift_probe: false,
            representation: Representation::Bitstring,
        }
    }

    /// Offspring per iteration.
    pub fn effective_lambda(&self) -> usize {
        match self.algorithm {
            AlgorithmKind::Spea2SteadyState | AlgorithmKind::Nsga2SteadyState => 1,
            AlgorithmKind::Spea2Generational => self.lambda.unwrap_or(self.mu),
            AlgorithmKind::Nsga2Classic => self.mu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::config("n must be at least 1"));
        }
        if self.mu == 0 {
            return Err(LabError::config("population size must be at least 1"));
        }
        match (self.algorithm, self.lambda) {
            (AlgorithmKind::Spea2Generational, Some(0)) => {
                return Err(LabError::config("lambda must be at least 1"));
            }
            (AlgorithmKind::Spea2Generational, _) | (_, None) => {}
            (a, Some(l)) if l != self.effective_lambda() => {
                return Err(LabError::config(format!(
                    "{a} fixes lambda to {}, got {l}",
                    self.effective_lambda()
                )));
            }
            _ => {}
        }
        match &self.init {
            InitSpec::Uniform => {}
            InitSpec::Counterexample { c } => {
                let size = counterexample_size(self.n, *c)
                    .map_err(|e| LabError::config(e.to_string()))?;
                if size != self.mu {
                    return Err(LabError::config(format!(
                        "the counterexample for n = {} and c = {c} has {size} members, but the population size is {}",
                        self.n, self.mu
                    )));
                }
            }
            InitSpec::Values { values } => {
                if values.len() != self.mu {
                    return Err(LabError::config(format!(
                        "{} initial values for a population of {}",
                        values.len(),
                        self.mu
                    )));
                }
                if let Some(v) = values.iter().find(|&&v| v > self.n as u64) {
                    return Err(LabError::config(format!("initial value {v} exceeds n = {}", self.n)));
                }
            }
        }
        if self.stop.target == StopTarget::OptimalSpread && !(2..=self.n).contains(&self.mu) {
            return Err(LabError::config(format!(
                "optimal spread needs 2 <= population size <= n, got {} and n = {}",
                self.mu, self.n
            )));
        }
        let may_not_terminate =
            self.algorithm != AlgorithmKind::Spea2SteadyState || self.stop.target == StopTarget::Never;
        if may_not_terminate && !self.stop.has_budget() {
            return Err(LabError::config(
                "this configuration needs an evaluation or iteration budget",
            ));
        }
        if self.drift_probe && !matches!(self.init, InitSpec::Counterexample { .. }) {
            return Err(LabError::config("the drift probe needs the counterexample start"));
        }
        if self.sample_every == Some(0) {
            return Err(LabError::config("sampling interval must be at least 1"));
        }
        Ok(())
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            stop: self.stop,
            monitors: self.monitors,
            sample_every: self.sample_every,
            drift: match (&self.init, self.drift_probe) {
                (InitSpec::Counterexample { c }, true) => Some(DriftProbeConfig { n: self.n, c: *c }),
                _ => None,
            },
        }
    }

    fn initial<G: Genotype>(&self, rng: &mut RandomSource) -> Result<Population<G>> {
        match &self.init {
            InitSpec::Uniform => Ok(Population::random(self.n, self.mu, rng)),
            InitSpec::Counterexample { c } => {
                Population::from_f1_values(self.n, &counterexample_values(self.n, *c)?)
            }
            InitSpec::Values { values } => Population::from_f1_values(self.n, values),
        }
    }

    fn run_as<G: Genotype>(&self, seed: u64) -> Result<TrajectoryRecord> {
        let mut rng = RandomSource::for_replication(seed);
        let init = self.initial::<G>(&mut rng)?;
        let options = self.run_options();
        let stepper: Box<dyn Stepper<G>> = match self.algorithm {
            AlgorithmKind::Spea2SteadyState | AlgorithmKind::Spea2Generational => {
                Box::new(Spea2Config {
                    mu: self.mu,
                    lambda: self.effective_lambda(),
                    mutation: self.mutation,
                    metric: self.metric,
                })
            }
            AlgorithmKind::Nsga2SteadyState => Box::new(Nsga2Config::steady_state(self.mu, self.mutation)),
            AlgorithmKind::Nsga2Classic => Box::new(Nsga2Config::classic(self.mu, self.mutation)),
        };
        run_trajectory(stepper.as_ref(), self.n, init, &options, &mut rng)
    }
}

/// One replication. The seed fixes the whole trajectory.
pub fn run_single(cfg: &ExperimentConfig, seed: u64) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    match cfg.representation {
        Representation::Bitstring => cfg.run_as::<Individual>(seed),
        Representation::OnesCount => cfg.run_as::<OnesCount>(seed),
    }
}

/// All seeds of `cfg`, concurrently, returned in seed-list order.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<Vec<TrajectoryRecord>> {
    cfg.validate()?;
    cfg.seeds.par_iter().map(|&s| run_single(cfg, s)).collect()
}
