//! Turn a validated configuration into a runnable game, search space, and
//! solver configurations.

use nashevo::game::lq::LqGameSpec;
use nashevo::game::nonquadratic::NonQuadraticSpec;
use nashevo::linalg::Mat;
use nashevo::local_search::SimplexConfig;
use nashevo::{
    BrBudget, EncodingScheme, FitnessOffset, GaConfig, Game64, Interval, PsoConfig, SearchSpace,
};

use crate::config::{
    ExperimentConfig, GameTemplate, LqTable, ModeSection, OffsetMode, SolverKind,
};
use crate::error::CliError;

/// Everything the runners need, derived once from the config.
pub struct GameBundle {
    pub game: Game64,
    /// Present for LQ templates; enables the exact open-loop oracle.
    pub lq_spec: Option<LqGameSpec<f64>>,
    pub space: SearchSpace<f64>,
    pub scheme: EncodingScheme,
}

fn mat(rows: &[Vec<f64>], what: &str) -> Result<Mat<f64>, CliError> {
    Mat::from_nested(rows).map_err(|e| CliError::config(format!("{what}: {e}")))
}

fn lq_spec_from_table(table: &LqTable) -> Result<LqGameSpec<f64>, CliError> {
    let a = table
        .a
        .iter()
        .enumerate()
        .map(|(k, m)| mat(m, &format!("game.lq.a[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let b = table
        .b
        .iter()
        .enumerate()
        .map(|(i, per_stage)| {
            per_stage
                .iter()
                .enumerate()
                .map(|(k, m)| mat(m, &format!("game.lq.b[{i}][{k}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let state_weights = table
        .state_weights
        .iter()
        .enumerate()
        .map(|(i, per_stage)| {
            per_stage
                .iter()
                .enumerate()
                .map(|(k, m)| mat(m, &format!("game.lq.state_weights[{i}][{k}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let control_weights = table
        .control_weights
        .iter()
        .enumerate()
        .map(|(i, per_stage)| {
            per_stage
                .iter()
                .enumerate()
                .map(|(k, m)| mat(m, &format!("game.lq.control_weights[{i}][{k}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let terminal_weights = table
        .terminal_weights
        .iter()
        .enumerate()
        .map(|(i, m)| mat(m, &format!("game.lq.terminal_weights[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let control_bounds = table
        .control_bounds
        .iter()
        .enumerate()
        .map(|(i, [lo, hi])| {
            Interval::new(*lo, *hi)
                .map_err(|e| CliError::config(format!("game.lq.control_bounds[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LqGameSpec {
        horizon: table.horizon,
        state_dim: table.state_dim,
        control_dims: table.control_dims.clone(),
        a,
        b,
        state_weights,
        control_weights,
        terminal_weights,
        initial_state: table.initial_state.clone(),
        control_bounds,
    })
}

pub fn build_game(config: &ExperimentConfig) -> Result<GameBundle, CliError> {
    let (game, lq_spec) = match config.game.template {
        GameTemplate::LqDemo => {
            let spec = LqGameSpec::<f64>::demo_two_player();
            let game = spec.build().map_err(|e| CliError::config(e.to_string()))?;
            (game, Some(spec))
        }
        GameTemplate::Lq => {
            let table = config.game.lq.as_ref().expect("validated by resolve");
            let spec = lq_spec_from_table(table)?;
            let game = spec.build().map_err(|e| CliError::config(e.to_string()))?;
            (game, Some(spec))
        }
        GameTemplate::LqRandom => {
            let table = config.game.lq_random.clone().unwrap_or_default();
            let spec = LqGameSpec::<f64>::random_strictly_convex(
                table.players,
                table.horizon,
                table.seed,
            );
            let game = spec.build().map_err(|e| CliError::config(e.to_string()))?;
            (game, Some(spec))
        }
        GameTemplate::NonQuadratic => {
            let t = config.game.nonquadratic.clone().unwrap_or_default();
            let spec = NonQuadraticSpec {
                horizon: t.horizon,
                state_factor: t.state_factor,
                control_factors: t.control_factors,
                state_weights: t.state_weights,
                control_weights: t.control_weights,
                quartic_weights: t.quartic_weights,
                exp_weights: t.exp_weights,
                exp_rate: t.exp_rate,
                terminal_weights: t.terminal_weights,
                initial_state: t.initial_state,
                control_bound: Interval::new(t.control_bound[0], t.control_bound[1])
                    .map_err(|e| CliError::config(format!("game.nonquadratic.control_bound: {e}")))?,
            };
            let game = spec.build().map_err(|e| CliError::config(e.to_string()))?;
            let lq = spec.lq_equivalent();
            (game, lq)
        }
    };

    let space = match config.game.mode {
        ModeSection::OpenLoop => SearchSpace::open_loop(&game),
        ModeSection::Feedback => {
            let bound = Interval::symmetric(config.game.feedback_param_bound)
                .map_err(|e| CliError::config(format!("game.feedback_param_bound: {e}")))?;
            SearchSpace::linear_feedback(&game, bound)
        }
    };
    if space.total_dim() == 0 {
        return Err(CliError::config(
            "the configured game has no decision variables (horizon 0)",
        ));
    }
    let scheme = EncodingScheme::for_space(
        config.encoding.magnitude_digits,
        config.encoding.decimal_position,
        &space,
    )
    .map_err(|e| CliError::config(format!("encoding: {e}")))?;

    Ok(GameBundle { game, lq_spec, space, scheme })
}

pub fn simplex_config(config: &ExperimentConfig) -> SimplexConfig<f64> {
    let ls = &config.local_search;
    SimplexConfig {
        max_iterations: ls.max_iterations,
        reflection: ls.reflection,
        expansion: ls.expansion,
        contraction: ls.contraction,
        shrink: ls.shrink,
        initial_step_fraction: ls.initial_step_fraction,
        min_initial_step: ls.min_initial_step,
        diameter_tolerance: ls.diameter_tolerance,
        value_tolerance: ls.value_tolerance,
    }
}

pub fn ga_config(config: &ExperimentConfig, seed: u64) -> GaConfig<f64> {
    let ga = &config.solver.ga;
    GaConfig {
        population_size: ga.population_size,
        crossover_prob: ga.crossover_prob,
        mutation_prob: ga.mutation_prob,
        elitism: ga.elitism,
        fitness_offset: match ga.offset_mode {
            OffsetMode::Adaptive => FitnessOffset::Adaptive,
            OffsetMode::Fixed => FitnessOffset::Fixed(ga.offset_value),
        },
        max_generations: ga.max_generations,
        stall_window: ga.stall_window,
        stall_tolerance: ga.stall_tolerance,
        parallel_eval: ga.parallel_eval,
        rng_seed: seed,
    }
}

pub fn pso_config(config: &ExperimentConfig, seed: u64) -> PsoConfig<f64> {
    let pso = &config.solver.pso;
    PsoConfig {
        swarm_size: pso.swarm_size,
        c1: pso.c1,
        c2: pso.c2,
        omega_max: pso.omega_max,
        omega_min: pso.omega_min,
        t_max: pso.t_max,
        v_max: pso.v_max,
        v_max_fraction: pso.v_max_fraction,
        hybrid_iter: pso.hybrid_iter.unwrap_or(0),
        refine_best_only: pso.refine_best_only,
        simplex: simplex_config(config),
        stagnation_window: pso.stagnation_window,
        mutation_fraction: pso.mutation_fraction,
        per_dimension_draws: pso.per_dimension_draws,
        stall_window: pso.stall_window,
        stall_tolerance: pso.stall_tolerance,
        parallel_eval: pso.parallel_eval,
        rng_seed: seed,
    }
}

pub fn br_budget(config: &ExperimentConfig) -> BrBudget<f64> {
    BrBudget {
        multistarts: config.verification.multistarts,
        simplex: simplex_config(config)
            .with_max_iterations(config.verification.simplex_iterations),
        rng_seed: config.verification.seed,
    }
}

/// Dispatch one solver run.
pub fn solve_once(
    config: &ExperimentConfig,
    bundle: &GameBundle,
    seed: u64,
) -> Result<nashevo::SolveResult64, CliError> {
    match config.solver.kind {
        SolverKind::Ga => nashevo::run_ga(
            &bundle.game,
            &bundle.space,
            &bundle.scheme,
            &ga_config(config, seed),
        )
        .map_err(|e| CliError::run(format!("GA run failed: {e}"))),
        SolverKind::Pso | SolverKind::HybridPso => nashevo::run_pso(
            &bundle.game,
            &bundle.space,
            &pso_config(config, seed),
        )
        .map_err(|e| CliError::run(format!("PSO run failed: {e}"))),
    }
}
