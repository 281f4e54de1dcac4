use std::fs;
use std::process::{Command, Output};

const HEADER: &str = "trial,n,k_true,epsilon,delta,seed,backend,k_hat,theta_min,theta_max,t_step1,iters_step2,grover_apps,oracle_queries,coin_flips,success,conforming,wall_ms";

fn qcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcount"))
        .args(args)
        .env("QCOUNT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows with the trailing wall-time column dropped.
fn data_rows(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect()
}

fn column<'a>(csv: &'a str, name: &str) -> Vec<&'a str> {
    let idx = csv.lines().next().unwrap().split(',').position(|h| h == name).unwrap();
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap()).collect()
}

#[test]
fn count_writes_exact_header_and_one_row_per_trial() {
    let out = stdout(&qcount(&["count", "--n", "4096", "--k", "17", "--trials", "4", "--seed", "5"]));
    assert_eq!(out.lines().next().unwrap(), HEADER);
    assert_eq!(out.lines().count(), 5);
    assert!(column(&out, "seed").iter().all(|s| *s == "5"));
    assert!(column(&out, "conforming").iter().all(|s| *s == "true"));
    assert_eq!(column(&out, "trial"), ["0", "1", "2", "3"]);
}

#[test]
fn reference_run_succeeds_on_almost_every_trial() {
    let out = stdout(&qcount(&[
        "count", "--n", "1048576", "--k", "1024", "--eps", "0.1", "--delta", "0.05", "--seed", "42",
        "--trials", "200",
    ]));
    let success = column(&out, "success");
    assert_eq!(success.len(), 200);
    assert!(success.iter().filter(|s| **s == "true").count() >= 190);
}

#[test]
fn zero_marked_gives_zero_estimates() {
    let out = stdout(&qcount(&["count", "--n", "65536", "--k", "0", "--trials", "3"]));
    assert!(column(&out, "k_hat").iter().all(|k| k.parse::<f64>().unwrap() == 0.0));
    assert!(column(&out, "success").iter().all(|s| *s == "true"));
}

#[test]
fn zero_epsilon_is_a_usage_error() {
    let out = qcount(&["count", "--n", "1024", "--k", "3", "--eps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--eps"), "{err}");
}

#[test]
fn bad_parameters_exit_with_status_two() {
    for args in [
        &["count", "--n", "8", "--k", "9"][..],
        &["count", "--n", "5000", "--k", "1", "--backend", "statevector"],
        &["amplitude", "--a", "1.0"],
        &["lemma-check", "--sweeps", "0"],
        &["count", "--delta", "1.5"],
        &["frobnicate"],
    ] {
        let out = qcount(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn reruns_are_byte_identical_apart_from_wall_time() {
    let args = ["count", "--n", "1048576", "--k", "300", "--trials", "16", "--seed", "9"];
    let a = stdout(&qcount(&args));
    let b = stdout(&qcount(&args));
    assert_eq!(data_rows(&a), data_rows(&b));

    let single = Command::new(env!("CARGO_BIN_EXE_qcount"))
        .args(args)
        .env("QCOUNT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(data_rows(&a), data_rows(&stdout(&single)));
}

#[test]
fn amplitude_rows_leave_n_empty() {
    let out = stdout(&qcount(&["amplitude", "--a", "0.25", "--trials", "2", "--backend", "statevector"]));
    assert!(column(&out, "n").iter().all(|n| n.is_empty()));
    assert!(column(&out, "k_true").iter().all(|k| *k == "0.25"));
}

#[test]
fn json_lines_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.jsonl");
    stdout(&qcount(&[
        "count", "--n", "2048", "--k", "5", "--trials", "3", "--format", "json-lines", "--output",
        path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.starts_with("{\"trial\":")));
}

#[test]
fn config_file_sets_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# smoke settings\neps = 0.2\ntrials = 3\nfast_constants = true\nseed = 11\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = stdout(&qcount(&["count", "--n", "4096", "--k", "40", "--config", cfg]));
    assert_eq!(out.lines().count(), 4);
    assert!(column(&out, "epsilon").iter().all(|e| *e == "0.2"));
    assert!(column(&out, "seed").iter().all(|s| *s == "11"));
    assert!(column(&out, "conforming").iter().all(|c| *c == "false"));

    let out = stdout(&qcount(&["count", "--n", "4096", "--k", "40", "--config", cfg, "--trials", "1", "--eps", "0.3"]));
    assert_eq!(out.lines().count(), 2);
    assert_eq!(column(&out, "epsilon"), ["0.3"]);
}

#[test]
fn validate_passes_and_fails_by_exit_status() {
    let out = qcount(&["validate", "--n", "1048576", "--k", "64", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));

    // A starved rough search stops too early and misses the target.
    let out = qcount(&[
        "validate", "--n", "1048576", "--k", "64", "--trials", "50", "--step1-multiplier", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn validate_amplitude_target() {
    let out = qcount(&["validate", "--target", "amplitude", "--a", "0.7", "--trials", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn lemma_check_reports_summary_and_violation_rows() {
    let out = qcount(&["lemma-check", "--sweeps", "300", "--seed", "4"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("sweeps=300 checks="), "{err}");
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv.lines().next().unwrap_or("sweep,check,theta_min,theta_max,gamma,r,theta,value,bound"),
        "sweep,check,theta_min,theta_max,gamma,r,theta,value,bound"
    );
}

#[test]
fn single_cell_scaling_study_has_no_fit() {
    let out = qcount(&[
        "scaling-study", "--n", "65536", "--ks", "16", "--eps-list", "0.2", "--trials-per-cell", "3",
    ]);
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 2);
    let fits = String::from_utf8_lossy(&out.stderr);
    assert!(fits.contains("epsilon_slope=none") && fits.contains("envelope_c=none"), "{fits}");
}

#[test]
fn scaling_study_fits_go_to_stdout_with_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cells.csv");
    let out = stdout(&qcount(&[
        "scaling-study", "--n", "1048576", "--ks", "64,1024", "--eps-list", "0.2,0.1",
        "--trials-per-cell", "3", "--output", path.to_str().unwrap(),
    ]));
    assert!(out.contains("sqrt_nk_slope=") && !out.contains("none"), "{out}");
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 5);
}
