//! End-to-end tests of the `nashevo` binary and the experiment plumbing.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nashevo"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn small_ga_config(out_dir: &Path) -> String {
    format!(
        r#"
[game]
template = "lq-demo"

[solver]
kind = "ga"

[solver.ga]
max_generations = 60

[run]
repeat = 1
base_seed = 5
out_dir = "{}"
"#,
        out_dir.display()
    )
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn solve_writes_run_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(tmp.path(), "config.toml", &small_ga_config(&out));
    let output = bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap();
    assert_exit(&output, 0);

    let run_dir = out.join("run_000");
    assert!(run_dir.join("trace.csv").is_file());
    assert!(run_dir.join("result.toml").is_file());
    assert!(run_dir.join("profile.toml").is_file());
    assert!(out.join("summary.toml").is_file());

    let trace = fs::read_to_string(run_dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iteration,player,best_cost,mean_cost,stagnation"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len() % 2, 0, "two players per iteration");
    assert!(rows[0].starts_with("1,0,"));
    assert!(rows[1].starts_with("1,1,"));
}

#[test]
fn fixed_seed_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = write(tmp.path(), "config.toml", &small_ga_config(&out_a));
    assert_exit(&bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap(), 0);
    let output = bin()
        .args(["solve"])
        .arg(&config)
        .arg("--quiet")
        .arg("--out-dir")
        .arg(&out_b)
        .output()
        .unwrap();
    assert_exit(&output, 0);

    let a = fs::read(out_a.join("run_000/trace.csv")).unwrap();
    let b = fs::read(out_b.join("run_000/trace.csv")).unwrap();
    assert_eq!(a, b, "same config and seed must give byte-identical traces");
}

#[test]
fn echoed_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(tmp.path(), "config.toml", &small_ga_config(&out));
    assert_exit(&bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap(), 0);

    // Extract the [config] section from result.toml and re-run from it.
    let echoed =
        nashevo_cli::config_from_result_file(&out.join("run_000/result.toml")).unwrap();
    let replay_dir = tmp.path().join("replay");
    let outcome = nashevo_cli::run_experiment(&echoed, &replay_dir, true).unwrap();
    assert!(outcome.all_succeeded());

    let original = fs::read(out.join("run_000/trace.csv")).unwrap();
    let replayed = fs::read(replay_dir.join("run_000/trace.csv")).unwrap();
    assert_eq!(original, replayed, "echoed config must reproduce the trace bytes");
}

#[test]
fn verify_accepts_solver_output_and_rejects_origin() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(tmp.path(), "config.toml", &small_ga_config(&out));
    assert_exit(&bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap(), 0);

    let output = bin()
        .args(["verify"])
        .arg(&config)
        .arg(out.join("run_000/profile.toml"))
        .arg("--quiet")
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let report = String::from_utf8_lossy(&output.stdout);
    assert!(report.contains("certified = true"), "report: {report}");

    let origin = write(
        tmp.path(),
        "origin.toml",
        r#"
mode = "open-loop"

[[players]]
controls = [[0.0]]

[[players]]
controls = [[0.0]]
"#,
    );
    let output = bin().args(["verify"]).arg(&config).arg(&origin).arg("--quiet").output().unwrap();
    assert_exit(&output, 0);
    let report = String::from_utf8_lossy(&output.stdout);
    assert!(report.contains("certified = false"), "report: {report}");
    // Both players must be named with their improving deviations.
    assert!(report.matches("[[players]]").count() == 2, "report: {report}");
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    // Unknown key.
    let bad = write(
        tmp.path(),
        "bad.toml",
        r#"
[game]
template = "lq-demo"
typo_key = 1

[solver]
kind = "ga"
"#,
    );
    let output = bin().args(["solve"]).arg(&bad).output().unwrap();
    assert_exit(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("typo_key"));

    // Out-of-range probability names the field.
    let bad = write(
        tmp.path(),
        "bad_pm.toml",
        r#"
[game]
template = "lq-demo"

[solver]
kind = "ga"

[solver.ga]
mutation_prob = 1.5
"#,
    );
    let output = bin().args(["solve"]).arg(&bad).output().unwrap();
    assert_exit(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("mutation_prob"));

    // Missing file.
    let output = bin().args(["solve", "no-such-config.toml"]).output().unwrap();
    assert_exit(&output, 2);
}

#[test]
fn run_failures_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    // A fixed fitness offset of zero makes every fitness non-positive, which
    // the roulette selection rejects; the run fails while the config is valid.
    let config = write(
        tmp.path(),
        "config.toml",
        &format!(
            r#"
[game]
template = "lq-demo"

[solver]
kind = "ga"

[solver.ga]
offset_mode = "fixed"
offset_value = 0.0
max_generations = 10

[run]
out_dir = "{}"
"#,
            out.display()
        ),
    );
    let output = bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap();
    assert_exit(&output, 1);
    // The failure is recorded in the summary and the remaining bookkeeping holds.
    let summary = fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("error:"), "summary: {summary}");
}

#[test]
fn repeat_runs_write_summary_statistics_that_recompute() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config_text = format!(
        r#"
[game]
template = "lq-demo"

[solver]
kind = "pso"

[solver.pso]
t_max = 120

[run]
repeat = 4
base_seed = 11
out_dir = "{}"
"#,
        out.display()
    );
    let config = write(tmp.path(), "config.toml", &config_text);
    assert_exit(&bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap(), 0);

    // Re-derive the per-player statistics from the per-run result files.
    let mut all_costs: Vec<Vec<f64>> = Vec::new();
    for r in 0..4 {
        let text = fs::read_to_string(out.join(format!("run_{r:03}/result.toml"))).unwrap();
        let value: toml::Value = toml::from_str(&text).unwrap();
        let costs: Vec<f64> = value["result"]["costs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_float().unwrap())
            .collect();
        all_costs.push(costs);
    }
    let summary: toml::Value =
        toml::from_str(&fs::read_to_string(out.join("summary.toml")).unwrap()).unwrap();
    for p in 0..2 {
        let vals: Vec<f64> = all_costs.iter().map(|c| c[p]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let got_mean = summary["summary"]["mean_costs"].as_array().unwrap()[p]
            .as_float()
            .unwrap();
        let got_spread = summary["summary"]["cost_spread"].as_array().unwrap()[p]
            .as_float()
            .unwrap();
        assert!((got_mean - mean).abs() < 1e-12);
        assert!((got_spread - spread).abs() < 1e-12);
    }
    // Derived seeds are base_seed + run index.
    for r in 0..4u64 {
        let text = fs::read_to_string(out.join(format!("run_{r:03}/result.toml"))).unwrap();
        assert!(text.contains(&format!("seed = {}", 11 + r)), "run {r} seed mismatch");
    }
}

#[test]
fn bench_reports_iterations_to_tolerance() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(
        tmp.path(),
        "config.toml",
        &format!(
            r#"
[game]
template = "lq-demo"

[solver]
kind = "ga"

[run]
out_dir = "{}"

[bench]
population_sizes = [6, 10]
repeats = 2
tolerance = 0.01
max_iterations = 150
"#,
            out.display()
        ),
    );
    let output = bin().args(["bench"]).arg(&config).arg("--quiet").output().unwrap();
    assert_exit(&output, 0);
    let report = fs::read_to_string(out.join("bench_report.txt")).unwrap();
    assert!(report.contains("population"), "report: {report}");
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert!(csv.starts_with("population,seed,iterations_to_tolerance,converged"));
    assert_eq!(csv.lines().count(), 1 + 4, "two sizes x two repeats");
}

#[test]
fn one_iteration_trace_has_header_and_one_row_per_player() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(
        tmp.path(),
        "config.toml",
        &format!(
            r#"
[game]
template = "lq-demo"

[solver]
kind = "ga"

[solver.ga]
max_generations = 1

[run]
out_dir = "{}"
"#,
            out.display()
        ),
    );
    assert_exit(&bin().args(["solve"]).arg(&config).arg("--quiet").output().unwrap(), 0);
    let trace = fs::read_to_string(out.join("run_000/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3, "header plus one row per player: {trace}");
}

#[test]
fn trace_re_emission_is_byte_identical() {
    let rows = vec![
        nashevo::TraceRow { iteration: 1, player: 0, best_cost: 0.25, mean_cost: 1.5, stagnation: 0 },
        nashevo::TraceRow { iteration: 1, player: 1, best_cost: 0.125, mean_cost: 0.75, stagnation: 0 },
    ];
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    nashevo_cli::emit_trace(&rows, &a).unwrap();
    nashevo_cli::emit_trace(&rows, &b).unwrap();
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn seed_and_repeat_flags_override_the_config() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(tmp.path(), "config.toml", &small_ga_config(&out));
    let output = bin()
        .args(["solve"])
        .arg(&config)
        .args(["--seed", "77", "--repeat", "2", "--quiet"])
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let first = fs::read_to_string(out.join("run_000/result.toml")).unwrap();
    assert!(first.contains("seed = 77"), "{first}");
    let second = fs::read_to_string(out.join("run_001/result.toml")).unwrap();
    assert!(second.contains("seed = 78"), "{second}");
}

#[test]
fn bench_requires_an_lq_game() {
    let tmp = TempDir::new().unwrap();
    let config = write(
        tmp.path(),
        "config.toml",
        r#"
[game]
template = "nonquadratic"

[solver]
kind = "ga"
"#,
    );
    let output = bin().args(["bench"]).arg(&config).arg("--quiet").output().unwrap();
    assert_exit(&output, 2);
}

#[test]
fn solver_override_flag_switches_the_solver() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write(tmp.path(), "config.toml", &small_ga_config(&out));
    let output = bin()
        .args(["solve"])
        .arg(&config)
        .args(["--solver", "pso", "--quiet"])
        .output()
        .unwrap();
    assert_exit(&output, 0);
    let result = fs::read_to_string(out.join("run_000/result.toml")).unwrap();
    assert!(result.contains("kind = \"pso\""), "result: {result}");
}
