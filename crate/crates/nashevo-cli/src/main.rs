use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nashevo::certify_nash;
use nashevo_cli::config::{ExperimentConfig, SolverKind};
use nashevo_cli::error::CliError;
use nashevo_cli::report::ReportFile;
use nashevo_cli::setup::{br_budget, build_game};
use nashevo_cli::{read_profile, run_bench, run_experiment};

/// Evolutionary Nash-equilibrium solvers for discrete-time dynamic games.
#[derive(Parser)]
#[command(name = "nashevo", version, about)]
struct Cli {
    /// Suppress progress output (files are still written).
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment (repeat runs with derived seeds).
    Solve {
        config: PathBuf,
        /// Override run.base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override run.out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override run.repeat.
        #[arg(long)]
        repeat: Option<usize>,
        /// Override solver.kind (ga, pso, hybrid-pso).
        #[arg(long)]
        solver: Option<SolverKind>,
    },
    /// Certify a strategy profile against the configured game.
    Verify {
        config: PathBuf,
        /// Profile file in the layout written by `solve` (profile.toml).
        profile: PathBuf,
    },
    /// Population/swarm size sweep reporting iterations-to-tolerance.
    Bench {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn apply_overrides(
    config: &mut ExperimentConfig,
    seed: Option<u64>,
    out_dir: Option<&PathBuf>,
    repeat: Option<usize>,
    solver: Option<SolverKind>,
) -> Result<(), CliError> {
    if let Some(seed) = seed {
        config.run.base_seed = seed;
        config.run.seeds = None;
    }
    if let Some(dir) = out_dir {
        config.run.out_dir = dir.display().to_string();
    }
    if let Some(repeat) = repeat {
        config.run.repeat = repeat;
        config.run.seeds = None;
    }
    if let Some(kind) = solver {
        config.solver.kind = kind;
        config.solver.pso.hybrid_iter = None;
    }
    config
        .resolve()
        .map_err(|e| CliError::config(format!("invalid configuration after overrides: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, seed, out_dir, repeat, solver } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_overrides(&mut cfg, seed, out_dir.as_ref(), repeat, solver)?;
            let out = PathBuf::from(&cfg.run.out_dir);
            let outcome = run_experiment(&cfg, &out, cli.quiet)?;
            if !cli.quiet {
                println!("summary written to {}", outcome.summary_path.display());
            }
            if !outcome.all_succeeded() {
                return Err(CliError::run(format!(
                    "{} of {} runs failed",
                    outcome.failures.len(),
                    outcome.failures.len() + outcome.runs.len()
                )));
            }
            Ok(())
        }
        Command::Verify { config, profile } => {
            let cfg = ExperimentConfig::load(&config)?;
            let bundle = build_game(&cfg)?;
            let profile = read_profile(&profile)?;
            let report = certify_nash(
                &bundle.game,
                &bundle.space,
                &profile,
                cfg.verification.tolerance,
                &br_budget(&cfg),
            )
            .map_err(|e| CliError::run(format!("verification failed: {e}")))?;
            print!("{}", ReportFile::from_report(&report).to_toml());
            if !cli.quiet {
                eprintln!(
                    "{} at tolerance {} (max gap {:.3e})",
                    if report.certified { "certified" } else { "NOT certified" },
                    cfg.verification.tolerance,
                    report.max_gap()
                );
            }
            Ok(())
        }
        Command::Bench { config, seed, out_dir } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_overrides(&mut cfg, seed, out_dir.as_ref(), None, None)?;
            let out = PathBuf::from(&cfg.run.out_dir);
            let outcome = run_bench(&cfg, &out, cli.quiet)?;
            if !cli.quiet {
                println!("bench report written to {}", outcome.report_path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
