//! Experiment flags, the TOML config file and their merge into an
//! [`ExperimentConfig`].

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spreadlab::harness::{
    AlgorithmKind, ExperimentConfig, InitSpec, Representation, StopRule, StopTarget,
};
use spreadlab::spea2::DistanceMetric;
use spreadlab::MutationKind;

use crate::UsageError;

pub const SEED_OFFSET_VAR: &str = "SEED_OFFSET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Uniform,
    Counterexample,
    Values,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetArg {
    Optimal,
    Extremes,
    Never,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Euclidean,
    F1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReprArg {
    Bitstring,
    OnesCount,
}

/// Seeds given either as a string (`0..99`, `0..=99`, `1,5,9`, `7`) or,
/// in the config file, as an array.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Text(String),
    List(Vec<u64>),
}

/// A parsed `--seeds` value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

fn parse_seed_list(s: &str) -> std::result::Result<SeedList, String> {
    parse_seeds(s).map(SeedList)
}

pub fn positive(s: &str) -> std::result::Result<u64, String> {
    match s.trim().parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a non-negative integer")),
    }
}

/// Parses `a..b` (both ends included, as in `0..99` for 100 seeds),
/// `a..=b`, a comma list or a single seed.
pub fn parse_seeds(s: &str) -> std::result::Result<Vec<u64>, String> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad seed `{t}` in `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        if a > b {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// Experiment flags shared by `run`, `sweep` and `monitors`. Every flag
/// overrides the corresponding config-file key.
#[derive(Args, Clone, Debug, Default)]
pub struct ExperimentArgs {
    /// TOML file with any of the keys below (kebab-case).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub algo: Option<AlgorithmKind>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Population size (`mu` for SPEA2, `N` for NSGA-II). Defaults to the
    /// counterexample size with `--init counterexample`.
    #[arg(long, value_parser = positive)]
    pub mu: Option<u64>,
    /// Offspring per generation (spea2-gen only).
    #[arg(long, value_parser = positive)]
    pub lambda: Option<u64>,
    #[arg(long)]
    pub mutation: Option<MutationKind>,
    #[arg(long)]
    pub metric: Option<MetricArg>,
    #[arg(long)]
    pub init: Option<InitKind>,
    /// Counterexample gap length.
    #[arg(long)]
    pub c: Option<usize>,
    /// Initial ones-counts for `--init values`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<u64>>,
    /// `0..99` (inclusive), `0..=99`, `1,5,9` or a single seed.
    #[arg(long, value_parser = parse_seed_list)]
    pub seeds: Option<SeedList>,
    /// Evaluation budget.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<u64>,
    #[arg(long)]
    pub target: Option<TargetArg>,
    /// Record a profile sample every this many iterations.
    #[arg(long, value_parser = positive)]
    pub thin: Option<u64>,
    #[arg(long)]
    pub drift_probe: bool,
    #[arg(long)]
    pub no_monitors: bool,
    #[arg(long)]
    pub representation: Option<ReprArg>,
    /// Exit 1 if any monitor report is produced.
    #[arg(long)]
    pub strict_invariants: bool,
    #[arg(long, value_parser = positive)]
    pub threads: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub algo: Option<String>,
    pub n: Option<usize>,
    pub mu: Option<u64>,
    pub lambda: Option<u64>,
    pub mutation: Option<String>,
    pub metric: Option<MetricArg>,
    pub init: Option<InitKind>,
    pub c: Option<usize>,
    pub values: Option<Vec<u64>>,
    pub seeds: Option<SeedSpec>,
    pub budget: Option<u64>,
    pub max_iterations: Option<u64>,
    pub target: Option<TargetArg>,
    pub thin: Option<u64>,
    pub drift_probe: Option<bool>,
    pub monitors: Option<bool>,
    pub representation: Option<ReprArg>,
    pub strict_invariants: Option<bool>,
    pub threads: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("config file {}: {e}", path.display())).into())
    }
}

/// Everything a command needs after merging flags over the config file.
#[derive(Clone, Debug, Serialize)]
pub struct Effective {
    pub experiment: ExperimentConfig,
    pub seed_offset: u64,
    pub strict_invariants: bool,
    pub threads: Option<u64>,
    pub out: PathBuf,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_field<T: std::str::FromStr>(key: &str, v: Option<&str>) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    v.map(|s| s.parse::<T>().map_err(|e| usage(format!("config key `{key}`: {e}"))))
        .transpose()
}

fn to_usize(key: &str, v: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| usage(format!("`{key}` is too large")))
}

pub fn seed_offset() -> Result<u64> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_OFFSET_VAR} must be a non-negative integer, got `{s}`"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(usage(format!("{SEED_OFFSET_VAR}: {e}"))),
    }
}

impl ExperimentArgs {
    /// Merges flags over the config file (if any), applies defaults and
    /// `SEED_OFFSET`, and validates the result.
    pub fn resolve(&self, default_out: &str) -> Result<Effective> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };

        let algo = match self.algo {
            Some(a) => a,
            None => parse_field::<AlgorithmKind>("algo", file.algo.as_deref())?
                .unwrap_or(AlgorithmKind::Spea2SteadyState),
        };
        let n = self.n.or(file.n).ok_or_else(|| usage("`--n` is required"))?;
        let mutation = match self.mutation {
            Some(m) => m,
            None => parse_field::<MutationKind>("mutation", file.mutation.as_deref())?
                .unwrap_or(MutationKind::OneBit),
        };
        let c = self.c.or(file.c);
        let values = self.values.clone().or(file.values);
        let init_kind = self.init.or(file.init).unwrap_or(match (c, &values) {
            (Some(_), _) => InitKind::Counterexample,
            (None, Some(_)) => InitKind::Values,
            _ => InitKind::Uniform,
        });
        let init = match init_kind {
            InitKind::Uniform => InitSpec::Uniform,
            InitKind::Counterexample => InitSpec::Counterexample {
                c: c.ok_or_else(|| usage("`--init counterexample` needs `--c`"))?,
            },
            InitKind::Values => InitSpec::Values {
                values: values.ok_or_else(|| usage("`--init values` needs `--values`"))?,
            },
        };
        let mu = match (self.mu.or(file.mu), &init) {
            (Some(m), _) => to_usize("mu", m)?,
            (None, InitSpec::Counterexample { c }) => spreadlab::harness::counterexample::counterexample_size(n, *c)
                .map_err(|e| usage(e.to_string()))?,
            (None, InitSpec::Values { values }) => values.len(),
            (None, InitSpec::Uniform) => return Err(usage("`--mu` is required")),
        };
        if mu == 0 {
            return Err(usage("`mu` must be at least 1"));
        }

        let mut cfg = ExperimentConfig::new(algo, n, mu);
        cfg.mutation = mutation;
        cfg.init = init;
        cfg.lambda = self.lambda.or(file.lambda).map(|l| to_usize("lambda", l)).transpose()?;
        cfg.metric = match self.metric.or(file.metric) {
            Some(MetricArg::Euclidean) => DistanceMetric::EuclideanBiObjective,
            Some(MetricArg::F1) | None => DistanceMetric::FirstObjectiveAbsolute,
        };
        cfg.representation = match self.representation.or(file.representation) {
            Some(ReprArg::OnesCount) => Representation::OnesCount,
            Some(ReprArg::Bitstring) | None => Representation::Bitstring,
        };
        let target = match self.target.or(file.target) {
            Some(TargetArg::Optimal) | None => StopTarget::OptimalSpread,
            Some(TargetArg::Extremes) => StopTarget::Extremes,
            Some(TargetArg::Never) => StopTarget::Never,
        };
        cfg.stop = StopRule {
            target,
            max_evaluations: self.budget.or(file.budget),
            max_iterations: self.max_iterations.or(file.max_iterations),
        };
        // Only steady-state SPEA2 is guaranteed to reach its target; the
        // others get an n^3 iteration budget unless one is given.
        let may_not_terminate = algo != AlgorithmKind::Spea2SteadyState || target == StopTarget::Never;
        if may_not_terminate && !cfg.stop.has_budget() {
            cfg.stop.max_iterations = Some((n as u64).saturating_pow(3));
        }
        cfg.sample_every = Some(self.thin.or(file.thin).unwrap_or(1));
        if cfg.sample_every == Some(0) {
            return Err(usage("`thin` must be at least 1"));
        }
        cfg.drift_probe = self.drift_probe || file.drift_probe.unwrap_or(false);
        cfg.monitors = !self.no_monitors && file.monitors.unwrap_or(true);

        let seed_offset = seed_offset()?;
        let seeds = match (&self.seeds, file.seeds) {
            (Some(s), _) => s.0.clone(),
            (None, Some(SeedSpec::Text(t))) => parse_seeds(&t).map_err(usage)?,
            (None, Some(SeedSpec::List(l))) => l,
            (None, None) => (0..10).collect(),
        };
        cfg.seeds = seeds
            .into_iter()
            .map(|s| s.checked_add(seed_offset).ok_or_else(|| usage("seed overflow after SEED_OFFSET")))
            .collect::<Result<_>>()?;

        cfg.validate().map_err(|e| usage(e.to_string()))?;

        let threads = self.threads.or(file.threads);
        if threads == Some(0) {
            return Err(usage("`threads` must be at least 1"));
        }
        Ok(Effective {
            experiment: cfg,
            seed_offset,
            strict_invariants: self.strict_invariants || file.strict_invariants.unwrap_or(false),
            threads,
            out: self.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(default_out)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_forms() {
        assert_eq!(parse_seeds("0..99").unwrap().len(), 100);
        assert_eq!(parse_seeds("3..=5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_seeds("1, 5,9").unwrap(), vec![1, 5, 9]);
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert!(parse_seeds("5..2").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn counterexample_defaults() {
        let args = ExperimentArgs {
            algo: Some(AlgorithmKind::Nsga2SteadyState),
            n: Some(64),
            c: Some(2),
            ..Default::default()
        };
        let eff = args.resolve("out").unwrap();
        assert_eq!(eff.experiment.mu, 33);
        assert_eq!(eff.experiment.init, InitSpec::Counterexample { c: 2 });
        assert_eq!(eff.experiment.stop.max_iterations, Some(64u64.pow(3)));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "algo = \"spea2-ss\"\nn = 20\nmu = 4\nseeds = [1, 2]\nthin = 5\n").unwrap();
        let args = ExperimentArgs { config: Some(path.clone()), mu: Some(6), ..Default::default() };
        let eff = args.resolve("out").unwrap();
        assert_eq!((eff.experiment.n, eff.experiment.mu), (20, 6));
        assert_eq!(eff.experiment.sample_every, Some(5));

        std::fs::write(&path, "n = 20\nbogus = 1\n").unwrap();
        let err = ExperimentArgs { config: Some(path), ..Default::default() }.resolve("out").unwrap_err();
        assert!(err.is::<UsageError>());
    }
}
