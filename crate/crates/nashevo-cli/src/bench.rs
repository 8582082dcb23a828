//! Population sweep: how many iterations each population size needs to bring
//! every player's cost within tolerance of the exact LQ equilibrium.

use std::path::{Path, PathBuf};

use nashevo::{lq_openloop_nash, run_ga, run_pso};

use crate::config::{BenchSection, ExperimentConfig, SolverKind};
use crate::error::CliError;
use crate::setup::{build_game, ga_config, pso_config};

pub struct BenchOutcome {
    pub report_path: PathBuf,
    pub csv_path: PathBuf,
    pub report_text: String,
}

struct SizeStats {
    size: usize,
    converged: usize,
    total: usize,
    mean_iterations: Option<f64>,
}

/// Run the sweep. Requires an LQ-family game (the oracle provides the
/// reference costs the tolerance is measured against).
pub fn run_bench(config: &ExperimentConfig, out_dir: &Path, quiet: bool) -> Result<BenchOutcome, CliError> {
    let bench = config.bench.clone().unwrap_or_default();
    let bundle = build_game(config)?;
    let spec = bundle.lq_spec.as_ref().ok_or_else(|| {
        CliError::config(
            "bench requires an LQ game template (lq, lq-demo, or lq-random); \
             the oracle supplies the reference equilibrium",
        )
    })?;
    let oracle = lq_openloop_nash(spec)
        .map_err(|e| CliError::run(format!("oracle failed: {e}")))?;
    let oracle_costs = bundle
        .game
        .evaluate_all_costs(&oracle)
        .map_err(|e| CliError::run(format!("oracle evaluation failed: {e}")))?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::run(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut csv = String::from("population,seed,iterations_to_tolerance,converged\n");
    let mut stats = Vec::new();

    for &size in &bench.population_sizes {
        let mut converged = Vec::new();
        for r in 0..bench.repeats {
            let seed = config.run.base_seed.wrapping_add(r as u64);
            let trace = run_sized(config, &bundle, size, seed, &bench)?;
            let players = bundle.game.num_players();
            let mut hit = None;
            let mut per_iter: Vec<Vec<f64>> = Vec::new();
            for row in &trace {
                if row.player == 0 {
                    per_iter.push(vec![f64::NAN; players]);
                }
                let last = per_iter.last_mut().expect("player 0 row opens the iteration");
                last[row.player] = row.best_cost;
            }
            for (g, costs) in per_iter.iter().enumerate() {
                let ok = costs
                    .iter()
                    .zip(oracle_costs.iter())
                    .all(|(c, o)| (c - o).abs() <= bench.tolerance);
                if ok {
                    hit = Some(g + 1);
                    break;
                }
            }
            match hit {
                Some(g) => {
                    csv.push_str(&format!("{size},{seed},{g},true\n"));
                    converged.push(g);
                }
                None => csv.push_str(&format!("{size},{seed},,false\n")),
            }
        }
        let mean = if converged.is_empty() {
            None
        } else {
            Some(converged.iter().sum::<usize>() as f64 / converged.len() as f64)
        };
        stats.push(SizeStats {
            size,
            converged: converged.len(),
            total: bench.repeats,
            mean_iterations: mean,
        });
    }

    let report_text = render_report(config.solver.kind, &bench, &stats);
    if !quiet {
        print!("{report_text}");
    }
    let report_path = out_dir.join("bench_report.txt");
    let csv_path = out_dir.join("bench.csv");
    std::fs::write(&report_path, &report_text)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", report_path.display())))?;
    std::fs::write(&csv_path, csv)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", csv_path.display())))?;

    Ok(BenchOutcome { report_path, csv_path, report_text })
}

fn run_sized(
    config: &ExperimentConfig,
    bundle: &crate::setup::GameBundle,
    size: usize,
    seed: u64,
    bench: &BenchSection,
) -> Result<Vec<nashevo::TraceRow<f64>>, CliError> {
    match config.solver.kind {
        SolverKind::Ga => {
            let mut ga = ga_config(config, seed);
            ga.population_size = size;
            ga.max_generations = bench.max_iterations;
            // Disable the stall stop so iterations-to-tolerance is measured
            // on an uninterrupted run.
            ga.stall_window = 0;
            run_ga(&bundle.game, &bundle.space, &bundle.scheme, &ga)
                .map(|r| r.trace)
                .map_err(|e| CliError::run(format!("GA bench run failed: {e}")))
        }
        SolverKind::Pso | SolverKind::HybridPso => {
            let mut pso = pso_config(config, seed);
            pso.swarm_size = size;
            pso.t_max = bench.max_iterations;
            pso.stall_window = 0;
            run_pso(&bundle.game, &bundle.space, &pso)
                .map(|r| r.trace)
                .map_err(|e| CliError::run(format!("PSO bench run failed: {e}")))
        }
    }
}

fn render_report(kind: SolverKind, bench: &BenchSection, stats: &[SizeStats]) -> String {
    let what = match kind {
        SolverKind::Ga => "population",
        _ => "swarm",
    };
    let mut out = String::new();
    out.push_str(&format!(
        "{what} size sweep: iterations to bring every player within {} of the oracle costs\n",
        bench.tolerance
    ));
    out.push_str(&format!("{:>10} {:>12} {:>22}\n", what, "converged", "mean iterations"));
    for s in stats {
        let mean = s
            .mean_iterations
            .map(|m| format!("{m:.1}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!("{:>10} {:>9}/{:<2} {:>22}\n", s.size, s.converged, s.total, mean));
    }

    // Note whether growing the population beyond 40 still helps much.
    let at = |size: usize| {
        stats
            .iter()
            .find(|s| s.size == size)
            .and_then(|s| s.mean_iterations)
    };
    if let (Some(m40), Some(m80)) = (at(40), at(80)) {
        let rel = (m40 - m80) / m40;
        let verdict = if rel < 0.25 { "marginal" } else { "substantial" };
        out.push_str(&format!(
            "improvement beyond size 40: {verdict} ({m40:.1} -> {m80:.1} mean iterations, {:.0}% reduction)\n",
            rel * 100.0
        ));
    }
    out
}
