//! Seeded experiment runs: per-run trace/result/profile files plus a summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use nashevo::{certify_nash, NashReport64, SolveResult64, TraceRow};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::profile_io::{write_profile, ProfileFile};
use crate::report::ReportFile;
use crate::setup::{br_budget, build_game, solve_once, GameBundle};

pub struct RunRecord {
    pub index: usize,
    pub seed: u64,
    pub result: SolveResult64,
    pub report: NashReport64,
    pub duration_secs: f64,
    pub dir: PathBuf,
}

pub struct ExperimentOutcome {
    pub runs: Vec<RunRecord>,
    pub failures: Vec<(usize, u64, String)>,
    pub summary_path: PathBuf,
}

impl ExperimentOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Write a convergence trace as CSV. Deterministic: field order, separators,
/// and float formatting depend only on the trace values.
pub fn emit_trace(trace: &[TraceRow<f64>], path: &Path) -> Result<(), CliError> {
    let mut out = String::from("iteration,player,best_cost,mean_cost,stagnation\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.iteration, row.player, row.best_cost, row.mean_cost, row.stagnation
        ));
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ResultFile {
    config: ExperimentConfig,
    result: ResultBody,
}

#[derive(Serialize, Deserialize)]
struct ResultBody {
    seed: u64,
    iterations: usize,
    duration_secs: f64,
    costs: Vec<f64>,
    verification: ReportFile,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: &'a ExperimentConfig,
    summary: SummaryBody,
}

#[derive(Serialize)]
struct SummaryBody {
    runs: usize,
    succeeded: usize,
    /// Per-player statistics over the successful runs' final costs.
    mean_costs: Vec<f64>,
    std_costs: Vec<f64>,
    /// Per-player max minus min final cost.
    cost_spread: Vec<f64>,
    max_cost_spread: f64,
    certified_runs: usize,
    entries: Vec<SummaryEntry>,
}

#[derive(Serialize)]
struct SummaryEntry {
    index: usize,
    seed: u64,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    costs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_secs: Option<f64>,
}

/// Execute every seeded run of the experiment, writing per-run artifacts and
/// a summary under `out_dir`. Individual run failures are recorded and do not
/// stop the remaining runs.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    quiet: bool,
) -> Result<ExperimentOutcome, CliError> {
    let bundle = build_game(config)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::run(format!("cannot create {}: {e}", out_dir.display())))?;

    let seeds = config.run_seeds();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut entries = Vec::new();

    for (index, &seed) in seeds.iter().enumerate() {
        match execute_run(config, &bundle, index, seed, out_dir) {
            Ok(record) => {
                if !quiet {
                    println!(
                        "run {index:03} seed {seed}: costs {:?} iterations {} certified {} ({:.2}s)",
                        record.result.costs,
                        record.result.iterations,
                        record.report.certified,
                        record.duration_secs
                    );
                }
                entries.push(SummaryEntry {
                    index,
                    seed,
                    status: "ok".into(),
                    costs: Some(record.result.costs.clone()),
                    iterations: Some(record.result.iterations),
                    certified: Some(record.report.certified),
                    duration_secs: Some(record.duration_secs),
                });
                runs.push(record);
            }
            Err(e) => {
                if !quiet {
                    eprintln!("run {index:03} seed {seed}: FAILED: {e}");
                }
                entries.push(SummaryEntry {
                    index,
                    seed,
                    status: format!("error: {e}"),
                    costs: None,
                    iterations: None,
                    certified: None,
                    duration_secs: None,
                });
                failures.push((index, seed, e.to_string()));
            }
        }
    }

    let players = bundle.game.num_players();
    let mut mean_costs = vec![0.0; players];
    let mut std_costs = vec![0.0; players];
    let mut cost_spread = vec![0.0; players];
    if !runs.is_empty() {
        for p in 0..players {
            let vals: Vec<f64> = runs.iter().map(|r| r.result.costs[p]).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            mean_costs[p] = mean;
            std_costs[p] = var.sqrt();
            cost_spread[p] = max - min;
        }
    }
    let max_cost_spread = cost_spread.iter().cloned().fold(0.0, f64::max);

    let summary = SummaryFile {
        config,
        summary: SummaryBody {
            runs: seeds.len(),
            succeeded: runs.len(),
            mean_costs,
            std_costs,
            cost_spread,
            max_cost_spread,
            certified_runs: runs.iter().filter(|r| r.report.certified).count(),
            entries,
        },
    };
    let summary_path = out_dir.join("summary.toml");
    let text = toml::to_string_pretty(&summary)
        .map_err(|e| CliError::run(format!("cannot serialize summary: {e}")))?;
    std::fs::write(&summary_path, text)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", summary_path.display())))?;

    Ok(ExperimentOutcome { runs, failures, summary_path })
}

fn execute_run(
    config: &ExperimentConfig,
    bundle: &GameBundle,
    index: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<RunRecord, CliError> {
    let dir = out_dir.join(format!("run_{index:03}"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::run(format!("cannot create {}: {e}", dir.display())))?;

    let started = Instant::now();
    let result = solve_once(config, bundle, seed)?;
    let report = certify_nash(
        &bundle.game,
        &bundle.space,
        &result.profile,
        config.verification.tolerance,
        &br_budget(config),
    )
    .map_err(|e| CliError::run(format!("certification failed: {e}")))?;
    let duration_secs = started.elapsed().as_secs_f64();

    emit_trace(&result.trace, &dir.join("trace.csv"))?;
    write_profile(&result.profile, &dir.join("profile.toml"))?;

    let result_file = ResultFile {
        config: config.single_run_echo(seed),
        result: ResultBody {
            seed,
            iterations: result.iterations,
            duration_secs,
            costs: result.costs.clone(),
            verification: ReportFile::from_report(&report),
        },
    };
    let text = toml::to_string_pretty(&result_file)
        .map_err(|e| CliError::run(format!("cannot serialize result: {e}")))?;
    std::fs::write(dir.join("result.toml"), text)
        .map_err(|e| CliError::run(format!("cannot write result.toml: {e}")))?;

    Ok(RunRecord { index, seed, result, report, duration_secs, dir })
}

/// Parse the `[config]` section back out of a result file; used to reproduce
/// a run from its echoed configuration.
pub fn config_from_result_file(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ResultFile = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid result file {}: {e}", path.display())))?;
    let mut config = parsed.config;
    config
        .resolve()
        .map_err(|e| CliError::config(format!("echoed config is invalid: {e}")))?;
    Ok(config)
}

/// Re-read a profile file written by a run.
pub fn profile_from_file(path: &Path) -> Result<ProfileFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid profile {}: {e}", path.display())))
}
