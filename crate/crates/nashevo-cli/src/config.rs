//! Experiment configuration: a strict TOML schema with every default
//! recorded, so the loaded config echoes back fully resolved.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSection,
    #[serde(default)]
    pub encoding: EncodingSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub local_search: LocalSearchSection,
    #[serde(default)]
    pub verification: VerificationSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameTemplate {
    /// Two-player single-stage scalar LQ game with a closed-form equilibrium.
    #[serde(rename = "lq-demo")]
    LqDemo,
    /// Explicit LQ matrices from the `[game.lq]` table.
    #[serde(rename = "lq")]
    Lq,
    /// Seeded strictly convex scalar LQ instance.
    #[serde(rename = "lq-random")]
    LqRandom,
    /// Built-in two-player non-quadratic template.
    #[serde(rename = "nonquadratic")]
    NonQuadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeSection {
    #[serde(rename = "open-loop")]
    OpenLoop,
    #[serde(rename = "feedback")]
    Feedback,
}

impl Default for ModeSection {
    fn default() -> Self {
        ModeSection::OpenLoop
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub template: GameTemplate,
    #[serde(default)]
    pub mode: ModeSection,
    /// Half-width of the symmetric box for feedback gain/offset parameters.
    #[serde(default = "default_feedback_bound")]
    pub feedback_param_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lq: Option<LqTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lq_random: Option<LqRandomTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonquadratic: Option<NonQuadraticTable>,
}

fn default_feedback_bound() -> f64 {
    3.0
}

/// Explicit LQ game matrices; shapes follow the game definition
/// (`a[stage]`, `b[player][stage]`, weights per player per stage).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqTable {
    pub horizon: usize,
    pub state_dim: usize,
    pub control_dims: Vec<usize>,
    pub a: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<Vec<Vec<f64>>>>,
    pub state_weights: Vec<Vec<Vec<Vec<f64>>>>,
    pub control_weights: Vec<Vec<Vec<Vec<f64>>>>,
    pub terminal_weights: Vec<Vec<Vec<f64>>>,
    pub initial_state: Vec<f64>,
    /// Per-player `[lo, hi]` control interval.
    pub control_bounds: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqRandomTable {
    #[serde(default = "default_players")]
    pub players: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_instance_seed")]
    pub seed: u64,
}

impl Default for LqRandomTable {
    fn default() -> Self {
        Self { players: 2, horizon: 3, seed: 1 }
    }
}

fn default_players() -> usize {
    2
}

fn default_horizon() -> usize {
    3
}

fn default_instance_seed() -> u64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonQuadraticTable {
    #[serde(default = "default_nq_horizon")]
    pub horizon: usize,
    #[serde(default = "default_nq_state_factor")]
    pub state_factor: f64,
    #[serde(default = "default_nq_control_factors")]
    pub control_factors: [f64; 2],
    #[serde(default = "default_nq_state_weights")]
    pub state_weights: [f64; 2],
    #[serde(default = "default_nq_control_weights")]
    pub control_weights: [f64; 2],
    #[serde(default = "default_nq_quartic_weights")]
    pub quartic_weights: [f64; 2],
    #[serde(default = "default_nq_exp_weights")]
    pub exp_weights: [f64; 2],
    #[serde(default = "default_nq_exp_rate")]
    pub exp_rate: f64,
    #[serde(default = "default_nq_terminal_weights")]
    pub terminal_weights: [f64; 2],
    #[serde(default = "default_nq_initial_state")]
    pub initial_state: f64,
    #[serde(default = "default_nq_control_bound")]
    pub control_bound: [f64; 2],
}

impl Default for NonQuadraticTable {
    fn default() -> Self {
        Self {
            horizon: default_nq_horizon(),
            state_factor: default_nq_state_factor(),
            control_factors: default_nq_control_factors(),
            state_weights: default_nq_state_weights(),
            control_weights: default_nq_control_weights(),
            quartic_weights: default_nq_quartic_weights(),
            exp_weights: default_nq_exp_weights(),
            exp_rate: default_nq_exp_rate(),
            terminal_weights: default_nq_terminal_weights(),
            initial_state: default_nq_initial_state(),
            control_bound: default_nq_control_bound(),
        }
    }
}

fn default_nq_horizon() -> usize {
    2
}
fn default_nq_state_factor() -> f64 {
    0.9
}
fn default_nq_control_factors() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_nq_state_weights() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_nq_control_weights() -> [f64; 2] {
    [0.5, 0.5]
}
fn default_nq_quartic_weights() -> [f64; 2] {
    [0.1, 0.1]
}
fn default_nq_exp_weights() -> [f64; 2] {
    [0.25, 0.25]
}
fn default_nq_exp_rate() -> f64 {
    0.5
}
fn default_nq_terminal_weights() -> [f64; 2] {
    [0.5, 0.5]
}
fn default_nq_initial_state() -> f64 {
    1.0
}
fn default_nq_control_bound() -> [f64; 2] {
    [-2.0, 2.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSection {
    #[serde(default = "default_magnitude_digits")]
    pub magnitude_digits: usize,
    #[serde(default = "default_decimal_position")]
    pub decimal_position: usize,
}

impl Default for EncodingSection {
    fn default() -> Self {
        Self {
            magnitude_digits: default_magnitude_digits(),
            decimal_position: default_decimal_position(),
        }
    }
}

fn default_magnitude_digits() -> usize {
    5
}

fn default_decimal_position() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum SolverKind {
    #[serde(rename = "ga")]
    Ga,
    #[serde(rename = "pso")]
    Pso,
    #[serde(rename = "hybrid-pso")]
    HybridPso,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub kind: SolverKind,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub pso: PsoSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    #[serde(default = "default_population_size")]
    pub population_size: usize,
    #[serde(default = "default_crossover_prob")]
    pub crossover_prob: f64,
    #[serde(default = "default_mutation_prob")]
    pub mutation_prob: f64,
    #[serde(default = "default_true")]
    pub elitism: bool,
    #[serde(default)]
    pub offset_mode: OffsetMode,
    #[serde(default = "default_offset_value")]
    pub offset_value: f64,
    #[serde(default = "default_max_generations")]
    pub max_generations: usize,
    #[serde(default = "default_ga_stall_window")]
    pub stall_window: usize,
    #[serde(default = "default_stall_tolerance")]
    pub stall_tolerance: f64,
    #[serde(default)]
    pub parallel_eval: bool,
}

impl Default for GaSection {
    fn default() -> Self {
        Self {
            population_size: default_population_size(),
            crossover_prob: default_crossover_prob(),
            mutation_prob: default_mutation_prob(),
            elitism: true,
            offset_mode: OffsetMode::default(),
            offset_value: default_offset_value(),
            max_generations: default_max_generations(),
            stall_window: default_ga_stall_window(),
            stall_tolerance: default_stall_tolerance(),
            parallel_eval: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OffsetMode {
    #[serde(rename = "adaptive")]
    Adaptive,
    #[serde(rename = "fixed")]
    Fixed,
}

impl Default for OffsetMode {
    fn default() -> Self {
        OffsetMode::Adaptive
    }
}

fn default_population_size() -> usize {
    40
}
fn default_crossover_prob() -> f64 {
    0.9
}
fn default_mutation_prob() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_offset_value() -> f64 {
    1000.0
}
fn default_max_generations() -> usize {
    2000
}
fn default_ga_stall_window() -> usize {
    400
}
fn default_stall_tolerance() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoSection {
    #[serde(default = "default_swarm_size")]
    pub swarm_size: usize,
    #[serde(default = "default_accel")]
    pub c1: f64,
    #[serde(default = "default_accel")]
    pub c2: f64,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    #[serde(default = "default_omega_min")]
    pub omega_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    /// Explicit velocity clamp; when absent the clamp is
    /// `v_max_fraction * bound width` per dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default = "default_v_max_fraction")]
    pub v_max_fraction: f64,
    /// Local-search steps per refinement; filled from the solver kind when
    /// absent (0 for plain PSO, 20 for hybrid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid_iter: Option<usize>,
    #[serde(default)]
    pub refine_best_only: bool,
    #[serde(default)]
    pub per_dimension_draws: bool,
    #[serde(default = "default_stagnation_window")]
    pub stagnation_window: usize,
    #[serde(default = "default_mutation_fraction")]
    pub mutation_fraction: f64,
    #[serde(default = "default_pso_stall_window")]
    pub stall_window: usize,
    #[serde(default = "default_stall_tolerance")]
    pub stall_tolerance: f64,
    #[serde(default)]
    pub parallel_eval: bool,
}

impl Default for PsoSection {
    fn default() -> Self {
        Self {
            swarm_size: default_swarm_size(),
            c1: default_accel(),
            c2: default_accel(),
            omega_max: default_omega_max(),
            omega_min: default_omega_min(),
            t_max: default_t_max(),
            v_max: None,
            v_max_fraction: default_v_max_fraction(),
            hybrid_iter: None,
            refine_best_only: false,
            per_dimension_draws: false,
            stagnation_window: default_stagnation_window(),
            mutation_fraction: default_mutation_fraction(),
            stall_window: default_pso_stall_window(),
            stall_tolerance: default_stall_tolerance(),
            parallel_eval: false,
        }
    }
}

fn default_swarm_size() -> usize {
    30
}
fn default_accel() -> f64 {
    1.8
}
fn default_omega_max() -> f64 {
    0.9
}
fn default_omega_min() -> f64 {
    0.4
}
fn default_t_max() -> usize {
    1000
}
fn default_v_max_fraction() -> f64 {
    0.2
}
fn default_stagnation_window() -> usize {
    20
}
fn default_mutation_fraction() -> f64 {
    0.2
}
fn default_pso_stall_window() -> usize {
    150
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSearchSection {
    #[serde(default = "default_ls_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_reflection")]
    pub reflection: f64,
    #[serde(default = "default_expansion")]
    pub expansion: f64,
    #[serde(default = "default_contraction")]
    pub contraction: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_initial_step_fraction")]
    pub initial_step_fraction: f64,
    #[serde(default = "default_min_initial_step")]
    pub min_initial_step: f64,
    #[serde(default = "default_diameter_tolerance")]
    pub diameter_tolerance: f64,
    #[serde(default = "default_value_tolerance")]
    pub value_tolerance: f64,
}

impl Default for LocalSearchSection {
    fn default() -> Self {
        Self {
            max_iterations: default_ls_max_iterations(),
            reflection: default_reflection(),
            expansion: default_expansion(),
            contraction: default_contraction(),
            shrink: default_shrink(),
            initial_step_fraction: default_initial_step_fraction(),
            min_initial_step: default_min_initial_step(),
            diameter_tolerance: default_diameter_tolerance(),
            value_tolerance: default_value_tolerance(),
        }
    }
}

fn default_ls_max_iterations() -> usize {
    400
}
fn default_reflection() -> f64 {
    1.0
}
fn default_expansion() -> f64 {
    2.0
}
fn default_contraction() -> f64 {
    0.5
}
fn default_shrink() -> f64 {
    0.5
}
fn default_initial_step_fraction() -> f64 {
    0.05
}
fn default_min_initial_step() -> f64 {
    0.025
}
fn default_diameter_tolerance() -> f64 {
    1e-10
}
fn default_value_tolerance() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_multistarts")]
    pub multistarts: usize,
    #[serde(default = "default_ls_max_iterations")]
    pub simplex_iterations: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for VerificationSection {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            multistarts: default_multistarts(),
            simplex_iterations: default_ls_max_iterations(),
            seed: 0,
        }
    }
}

fn default_tolerance() -> f64 {
    1e-3
}
fn default_multistarts() -> usize {
    8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_repeat")]
    pub repeat: usize,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    /// Explicit seed list; when present it overrides `repeat`/`base_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            repeat: default_repeat(),
            base_seed: default_base_seed(),
            seeds: None,
            out_dir: default_out_dir(),
        }
    }
}

fn default_repeat() -> usize {
    1
}
fn default_base_seed() -> u64 {
    42
}
fn default_out_dir() -> String {
    "runs".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[serde(default = "default_bench_sizes")]
    pub population_sizes: Vec<usize>,
    #[serde(default = "default_bench_repeats")]
    pub repeats: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_generations")]
    pub max_iterations: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            population_sizes: default_bench_sizes(),
            repeats: default_bench_repeats(),
            tolerance: default_tolerance(),
            max_iterations: default_max_generations(),
        }
    }
}

fn default_bench_sizes() -> Vec<usize> {
    vec![10, 20, 40, 80]
}
fn default_bench_repeats() -> usize {
    5
}

impl ExperimentConfig {
    /// Parse, validate, and fill defaults. The returned config is the
    /// effective configuration echoed into every result file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| {
            CliError::config(format!("invalid config {}: {e}", path.display()))
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        config.resolve()?;
        Ok(config)
    }

    /// Validate invariants and resolve kind-dependent defaults in place.
    pub fn resolve(&mut self) -> Result<(), String> {
        match self.game.template {
            GameTemplate::Lq => {
                if self.game.lq.is_none() {
                    return Err("game.template \"lq\" requires a [game.lq] table".into());
                }
            }
            GameTemplate::LqDemo => {
                if self.game.lq.is_some() {
                    return Err("game.template \"lq-demo\" does not take a [game.lq] table".into());
                }
            }
            GameTemplate::LqRandom => {
                if self.game.lq_random.is_none() {
                    self.game.lq_random = Some(LqRandomTable::default());
                }
            }
            GameTemplate::NonQuadratic => {
                if self.game.nonquadratic.is_none() {
                    self.game.nonquadratic = Some(NonQuadraticTable::default());
                }
            }
        }
        if self.game.template != GameTemplate::Lq && self.game.lq.is_some() {
            return Err("a [game.lq] table is only valid with game.template \"lq\"".into());
        }
        if self.game.template != GameTemplate::LqRandom && self.game.lq_random.is_some() {
            return Err("a [game.lq_random] table is only valid with game.template \"lq-random\"".into());
        }
        if self.game.template != GameTemplate::NonQuadratic && self.game.nonquadratic.is_some() {
            return Err(
                "a [game.nonquadratic] table is only valid with game.template \"nonquadratic\"".into()
            );
        }
        if !(self.game.feedback_param_bound > 0.0) {
            return Err(format!(
                "game.feedback_param_bound must be > 0, got {}",
                self.game.feedback_param_bound
            ));
        }

        let ga = &self.solver.ga;
        if ga.population_size < 2 {
            return Err(format!(
                "solver.ga.population_size must be at least 2, got {}",
                ga.population_size
            ));
        }
        if !(0.0..=1.0).contains(&ga.crossover_prob) {
            return Err(format!(
                "solver.ga.crossover_prob must be within [0, 1], got {}",
                ga.crossover_prob
            ));
        }
        if !(0.0..=1.0).contains(&ga.mutation_prob) {
            return Err(format!(
                "solver.ga.mutation_prob must be within [0, 1], got {}",
                ga.mutation_prob
            ));
        }
        if ga.max_generations == 0 {
            return Err("solver.ga.max_generations must be at least 1".into());
        }
        if ga.stall_tolerance < 0.0 {
            return Err("solver.ga.stall_tolerance must be nonnegative".into());
        }

        let pso = &mut self.solver.pso;
        if pso.swarm_size == 0 {
            return Err("solver.pso.swarm_size must be positive".into());
        }
        if pso.omega_min > pso.omega_max {
            return Err(format!(
                "solver.pso.omega_min ({}) must not exceed omega_max ({})",
                pso.omega_min, pso.omega_max
            ));
        }
        if pso.t_max == 0 {
            return Err("solver.pso.t_max must be at least 1".into());
        }
        if let Some(v) = pso.v_max {
            if !(v > 0.0) {
                return Err(format!("solver.pso.v_max must be > 0, got {v}"));
            }
        }
        if !(pso.v_max_fraction > 0.0) {
            return Err(format!(
                "solver.pso.v_max_fraction must be > 0, got {}",
                pso.v_max_fraction
            ));
        }
        if !(0.0..=1.0).contains(&pso.mutation_fraction) {
            return Err(format!(
                "solver.pso.mutation_fraction must be within [0, 1], got {}",
                pso.mutation_fraction
            ));
        }
        match (self.solver.kind, pso.hybrid_iter) {
            (SolverKind::Pso, None) => pso.hybrid_iter = Some(0),
            (SolverKind::Pso, Some(n)) if n > 0 => {
                return Err(
                    "solver.pso.hybrid_iter > 0 requires solver.kind \"hybrid-pso\"".into(),
                );
            }
            (SolverKind::HybridPso, None) => pso.hybrid_iter = Some(20),
            (SolverKind::HybridPso, Some(0)) => {
                return Err("solver.kind \"hybrid-pso\" requires hybrid_iter >= 1".into());
            }
            _ => {}
        }

        let ls = &self.local_search;
        if !(ls.reflection > 0.0) {
            return Err(format!("local_search.reflection must be > 0, got {}", ls.reflection));
        }
        if !(ls.expansion > 1.0) {
            return Err(format!("local_search.expansion must be > 1, got {}", ls.expansion));
        }
        if !(0.0 < ls.contraction && ls.contraction < 1.0) {
            return Err(format!(
                "local_search.contraction must be in (0, 1), got {}",
                ls.contraction
            ));
        }
        if !(0.0 < ls.shrink && ls.shrink < 1.0) {
            return Err(format!("local_search.shrink must be in (0, 1), got {}", ls.shrink));
        }

        if !(self.verification.tolerance > 0.0) {
            return Err(format!(
                "verification.tolerance must be > 0, got {}",
                self.verification.tolerance
            ));
        }

        if self.run.repeat == 0 {
            return Err("run.repeat must be at least 1".into());
        }
        if let Some(seeds) = &self.run.seeds {
            if seeds.is_empty() {
                return Err("run.seeds must not be empty when present".into());
            }
        }

        if self.encoding.magnitude_digits == 0 || self.encoding.magnitude_digits > 15 {
            return Err(format!(
                "encoding.magnitude_digits must be in 1..=15, got {}",
                self.encoding.magnitude_digits
            ));
        }
        if self.encoding.decimal_position > self.encoding.magnitude_digits {
            return Err(format!(
                "encoding.decimal_position ({}) must not exceed magnitude_digits ({})",
                self.encoding.decimal_position, self.encoding.magnitude_digits
            ));
        }

        if let Some(bench) = &self.bench {
            if bench.population_sizes.is_empty() {
                return Err("bench.population_sizes must not be empty".into());
            }
            if bench.population_sizes.iter().any(|&s| s < 2) {
                return Err("bench.population_sizes entries must be at least 2".into());
            }
            if bench.repeats == 0 {
                return Err("bench.repeats must be at least 1".into());
            }
            if !(bench.tolerance > 0.0) {
                return Err(format!("bench.tolerance must be > 0, got {}", bench.tolerance));
            }
        }
        Ok(())
    }

    /// The seeds this experiment will run, in order.
    pub fn run_seeds(&self) -> Vec<u64> {
        match &self.run.seeds {
            Some(seeds) => seeds.clone(),
            None => (0..self.run.repeat)
                .map(|r| self.run.base_seed.wrapping_add(r as u64))
                .collect(),
        }
    }

    /// Single-run copy whose echo reproduces run `index` exactly.
    pub fn single_run_echo(&self, seed: u64) -> Self {
        let mut echo = self.clone();
        echo.run.repeat = 1;
        echo.run.base_seed = seed;
        echo.run.seeds = None;
        echo
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
