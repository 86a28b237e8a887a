use std::path::Path;
use std::process::{Command, Output};

fn spreadlab(args: &[&str]) -> Output {
    spreadlab_env(args, &[])
}

fn spreadlab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spreadlab"));
    cmd.args(args).env_remove("SEED_OFFSET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn announced(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .filter_map(|l| l.strip_prefix("wrote ").map(String::from))
        .collect()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_one_csv_per_seed_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = spreadlab(&[
        "run", "--algo", "spea2-ss", "--n", "24", "--mu", "6", "--mutation", "one-bit", "--seeds", "0..9",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let paths = announced(&o);
    assert_eq!(paths.len(), 12);
    for p in &paths {
        let p = Path::new(p);
        assert!(p.starts_with(&out) && p.exists(), "{}", p.display());
    }
    let csvs = std::fs::read_dir(out.join("trajectories")).unwrap().count();
    assert_eq!(csvs, 10);
    let header = std::fs::read_to_string(out.join("trajectories/seed_0.csv")).unwrap();
    assert!(header.starts_with("iteration,evaluations,X,N_min,Y,M_max,min_f1,max_f1,distinct,optimal\n"));

    let s = summary(&out);
    assert_eq!(s["runs"], 10);
    assert_eq!(s["reached_optimal"], 10);
    assert_eq!(s["config"]["experiment"]["n"], 24);
    assert_eq!(s["config"]["experiment"]["mutation"], "one-bit");
}

#[test]
fn nothing_is_written_outside_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let o = Command::new(env!("CARGO_BIN_EXE_spreadlab"))
        .current_dir(dir.path())
        .args(["run", "--n", "12", "--mu", "3", "--seeds", "0", "--out", "nested/out"])
        .env_remove("SEED_OFFSET")
        .output()
        .unwrap();
    assert!(o.status.success());
    let top: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(top, vec![std::ffi::OsString::from("nested")]);
    assert!(out.join("summary.json").exists());
}

#[test]
fn counterexample_run_derives_population_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ce");
    let o = spreadlab(&[
        "run", "--algo", "nsga2-ss", "--init", "counterexample", "--c", "2", "--n", "32", "--seeds", "0..1",
        "--thin", "16", "--drift-probe", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["config"]["experiment"]["mu"], 17);
    assert_eq!(s["config"]["experiment"]["stop"]["max_iterations"], 32 * 32 * 32);
    assert_eq!(s["config"]["experiment"]["init"]["kind"], "counterexample");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["run", "--n", "10", "--mu", "0"],
        vec!["run", "--mu", "4"],
        vec!["run", "--n", "10", "--mu", "4", "--algo", "bogus"],
        vec!["run", "--n", "10", "--mu", "11"],
        vec!["run", "--n", "30", "--init", "counterexample", "--c", "2"],
        vec!["oracle-check", "--n", "12"],
        vec!["oracle-check", "--n", "4", "--mu", "9"],
        vec!["counterexample", "--n", "33", "--c", "2"],
        vec!["no-such-command"],
    ] {
        let o = spreadlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn mu_zero_prints_usage() {
    let o = spreadlab(&["run", "--n", "10", "--mu", "0"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--mu"), "{err}");
}

#[test]
fn oracle_check_passes_for_both_algorithms() {
    for algo in ["spea2-ss", "nsga2-ss"] {
        let o = spreadlab(&["oracle-check", "--algo", algo, "--n", "4", "--mu", "3", "--samples", "20000", "--tolerance", "0.03"]);
        assert_eq!(o.status.code(), Some(0), "{algo}: {}", stdout(&o));
        assert!(stdout(&o).contains("0 failing"));
    }
}

#[test]
fn oracle_check_fails_with_zero_tolerance() {
    let o = spreadlab(&["oracle-check", "--n", "3", "--mu", "3", "--samples", "100", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn counterexample_prints_the_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = spreadlab(&["counterexample", "--n", "32", "--c", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("f1 values: 0,2,5,7,8,10,12,"));
    assert!(text.contains("X=1 N_min=1 Y=3 M_max=1"));
    assert!(text.contains("alpha=2 beta=16"));
    assert_eq!(announced(&o), vec![dir.path().join("counterexample.json").display().to_string()]);
}

#[test]
fn seed_offset_shifts_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = spreadlab_env(
        &["run", "--n", "12", "--mu", "4", "--seeds", "0,1", "--out", out.to_str().unwrap()],
        &[("SEED_OFFSET", "100")],
    );
    assert!(o.status.success());
    assert!(out.join("trajectories/seed_100.csv").exists());
    assert!(out.join("trajectories/seed_101.csv").exists());
    let s = summary(&out);
    assert_eq!(s["config"]["seed_offset"], 100);
    assert_eq!(s["seeds"][0]["seed"], 100);

    let o = spreadlab_env(&["run", "--n", "12", "--mu", "4"], &[("SEED_OFFSET", "x")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_seeds_give_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = spreadlab(&[
            "run", "--n", "20", "--mu", "5", "--seeds", "0..5", "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let mut s = summary(&out);
        s.as_object_mut().unwrap().remove("config");
        s
    };
    assert_eq!(run("a", "1"), run("b", "2"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let out = dir.path().join("o");
    std::fs::write(
        &cfg,
        format!("algo = \"spea2-ss\"\nn = 16\nmu = 4\nseeds = \"0..2\"\nout = \"{}\"\n", out.display()),
    )
    .unwrap();
    let o = spreadlab(&["run", "--config", cfg.to_str().unwrap(), "--mu", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["config"]["experiment"]["mu"], 5);
    assert_eq!(s["config"]["experiment"]["n"], 16);
    assert_eq!(s["runs"], 3);
}

#[test]
fn strict_invariants_turns_reports_into_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let args = ["run", "--algo", "nsga2-ss", "--n", "16", "--mu", "5", "--seeds", "0..3", "--out", out.to_str().unwrap()];
    let relaxed = spreadlab(&args);
    assert_eq!(relaxed.status.code(), Some(0));
    let s = summary(&out);
    assert!(s["advisories"].as_u64().unwrap() > 0, "expected advisories for this configuration");

    let mut strict = args.to_vec();
    strict.push("--strict-invariants");
    assert_eq!(spreadlab(&strict).status.code(), Some(1));
}

#[test]
fn monitors_subcommand_tabulates_and_passes_on_spea2() {
    let dir = tempfile::tempdir().unwrap();
    let o = spreadlab(&[
        "monitors", "--n", "24", "--mu", "8", "--seeds", "0..9", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no reports over 10 runs"));
    assert!(!dir.path().join("trajectories").exists());
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = spreadlab(&[
        "sweep", "--grid", "12:3,16:4", "--seeds", "0..3", "--target", "extremes", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(announced(&o).len(), 2);
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((&rows[1][0], &rows[1][1], &rows[1][4]), ("16", "4", "4"));
}
