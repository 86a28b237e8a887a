use proptest::prelude::*;

use spreadlab::harness::{
    run_replications, run_single, AlgorithmKind, ExperimentConfig, InitSpec, Representation, StopRule,
    StopTarget,
};
use spreadlab::invariants::Severity;
use spreadlab::{alpha_beta, is_optimal_spread};

fn arb_algorithm() -> impl Strategy<Value = AlgorithmKind> {
    prop::sample::select(AlgorithmKind::ALL.to_vec())
}

/// A valid `(n, values)` start with `2 <= mu <= n`.
fn arb_start() -> impl Strategy<Value = (usize, Vec<u64>)> {
    (4usize..40).prop_flat_map(|n| (Just(n), prop::collection::vec(0..=n as u64, 2..=n.min(12))))
}

fn budgeted(alg: AlgorithmKind, n: usize, values: Vec<u64>, iterations: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(alg, n, values.len());
    cfg.init = InitSpec::Values { values };
    cfg.stop = StopRule { target: StopTarget::OptimalSpread, max_evaluations: None, max_iterations: Some(iterations) };
    cfg.sample_every = Some(1);
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steady_state_spea2_monitors_silent_from_any_start((n, values) in arb_start(), seed in any::<u64>()) {
        let cfg = budgeted(AlgorithmKind::Spea2SteadyState, n, values, 400);
        let rec = run_single(&cfg, seed).unwrap();
        let violations: Vec<_> = rec.reports.iter().filter(|r| r.severity == Severity::Violation).collect();
        prop_assert!(violations.is_empty(), "{:?}", violations.first().map(|r| (&r.monitor, &r.detail)));
    }

    #[test]
    fn evaluation_accounting_and_bounds(alg in arb_algorithm(), (n, values) in arb_start(), seed in any::<u64>()) {
        let mu = values.len();
        let cfg = budgeted(alg, n, values, 60);
        let rec = run_single(&cfg, seed).unwrap();
        prop_assert_eq!(rec.evaluations, (mu + cfg.effective_lambda() * rec.iterations as usize) as u64);
        prop_assert_eq!(rec.final_values.len(), mu);
        prop_assert!(rec.final_values.iter().all(|&v| v <= n as u64));
        prop_assert_eq!(rec.reached_optimal, is_optimal_spread(&rec.final_values, n as u64));
        let last = rec.samples.last().unwrap();
        prop_assert_eq!(last.iteration, rec.iterations);
        prop_assert!(rec.samples.windows(2).all(|w| w[0].iteration < w[1].iteration));
    }

    #[test]
    fn milestones_respect_their_partial_order((n, values) in arb_start(), seed in any::<u64>()) {
        let mu = values.len();
        let mut cfg = budgeted(AlgorithmKind::Spea2SteadyState, n, values, 0);
        cfg.stop.max_iterations = None;
        let rec = run_single(&cfg, seed).unwrap();
        let m = rec.milestones;
        let optimal = m.optimal.unwrap().evaluations;
        prop_assert!(m.distinct.unwrap().evaluations <= optimal);
        prop_assert!(m.extremes.unwrap().evaluations <= optimal);
        if alpha_beta(n as u64, mu as u64).unwrap().alpha >= 2 {
            prop_assert!(m.min_gap_two.unwrap().evaluations <= optimal);
        }
    }

    #[test]
    fn alpha_beta_partitions_n(n in 2u64..100_000, frac in 0.0f64..1.0) {
        let mu = 2 + ((n - 2) as f64 * frac) as u64;
        let ab = alpha_beta(n, mu).unwrap();
        prop_assert!(ab.beta < mu);
        prop_assert_eq!(ab.alpha * ab.beta + (ab.alpha + 1) * (mu - 1 - ab.beta), n);
    }
}

#[test]
fn identical_config_and_seed_reproduce_the_record() {
    for alg in AlgorithmKind::ALL {
        let mut cfg = ExperimentConfig::new(alg, 20, 5);
        cfg.stop.max_iterations = Some(300);
        cfg.sample_every = Some(3);
        for repr in [Representation::Bitstring, Representation::OnesCount] {
            cfg.representation = repr;
            assert_eq!(run_single(&cfg, 11).unwrap(), run_single(&cfg, 11).unwrap(), "{alg} {repr:?}");
        }
    }
}

#[test]
fn replications_are_independent_of_batch_composition() {
    let mut cfg = ExperimentConfig::new(AlgorithmKind::Nsga2SteadyState, 24, 6);
    cfg.stop.max_iterations = Some(2_000);
    cfg.seeds = vec![9, 3, 5, 1];
    let batch = run_replications(&cfg).unwrap();
    assert_eq!(batch.iter().map(|r| r.seed).collect::<Vec<_>>(), cfg.seeds);
    for r in &batch {
        assert_eq!(r, &run_single(&cfg, r.seed).unwrap());
    }
    cfg.seeds.clear();
    assert!(run_replications(&cfg).unwrap().is_empty());
}

#[test]
fn invalid_config_fails_before_running() {
    let mut cfg = ExperimentConfig::new(AlgorithmKind::Spea2SteadyState, 10, 11);
    cfg.seeds = (0..1000).collect();
    assert!(run_replications(&cfg).is_err());
    let mut cfg = ExperimentConfig::new(AlgorithmKind::Nsga2Classic, 10, 4);
    cfg.seeds = vec![0];
    assert!(run_replications(&cfg).is_err(), "no budget");
}

#[test]
fn counterexample_runs_track_the_drift_probe() {
    let mut cfg = ExperimentConfig::new(AlgorithmKind::Nsga2SteadyState, 96, 33);
    cfg.init = InitSpec::Counterexample { c: 3 };
    cfg.representation = Representation::OnesCount;
    cfg.drift_probe = true;
    cfg.stop.max_iterations = Some(50_000);
    cfg.seeds = (0..8).collect();
    let records = run_replications(&cfg).unwrap();
    let est = spreadlab::harness::estimate_drift(&records).unwrap();
    // With c = 3 the wide gap is pushed back toward the border.
    assert!(est.wide.moves > 100);
    assert!(est.wide.drift.unwrap() < -0.5, "{:?}", est.wide.drift);
    assert!(records.iter().all(|r| !r.reached_optimal));
}
