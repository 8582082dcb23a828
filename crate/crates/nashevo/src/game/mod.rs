//! N-player, K-stage dynamic games: dynamics, strategy profiles, trajectory
//! simulation, and per-player cost evaluation.

pub mod lq;
pub mod nonquadratic;

use std::sync::Arc;

use thiserror::Error;

use crate::real::Real;
use crate::space::{Interval, StrategyMode};

/// State transition `f_k(x_k, u_{1,k}, ..., u_{N,k}) -> x_{k+1}`.
pub type TransitionFn<R> = Arc<dyn Fn(usize, &[R], &[Vec<R>]) -> Vec<R> + Send + Sync>;
/// Per-player running cost `g_{i,k}(x_k, u_{1,k}, ..., u_{N,k})`.
pub type StageCostFn<R> = Arc<dyn Fn(usize, &[R], &[Vec<R>]) -> R + Send + Sync>;
/// Per-player terminal cost `h_i(x_K)`.
pub type TerminalCostFn<R> = Arc<dyn Fn(&[R]) -> R + Send + Sync>;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game definition: {0}")]
    InvalidDefinition(String),
    #[error("empty control bound interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("player index {player} out of range (game has {num_players} players)")]
    PlayerIndex { player: usize, num_players: usize },
    #[error("profile has {got} players, game has {expected}")]
    ProfilePlayers { got: usize, expected: usize },
    #[error("player {player} supplies {got} stages of decisions, expected {expected}")]
    ControlCount { player: usize, got: usize, expected: usize },
    #[error("player {player} control at stage {stage} has dimension {got}, expected {expected}")]
    ControlDim { player: usize, stage: usize, got: usize, expected: usize },
    #[error(
        "player {player} feedback gain at stage {stage} has shape {rows}x{cols}, \
         expected {expected_rows}x{expected_cols}"
    )]
    GainDim {
        player: usize,
        stage: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("player {player} feedback offset at stage {stage} has length {got}, expected {expected}")]
    OffsetDim { player: usize, stage: usize, got: usize, expected: usize },
    #[error("transition at stage {stage} returned a state of dimension {got}, expected {expected}")]
    StateDim { stage: usize, got: usize, expected: usize },
    #[error("model defect: non-finite {term} for player {player} at stage {stage:?}")]
    NonFiniteCost { player: usize, stage: Option<usize>, term: &'static str },
    #[error("strategy profile mode does not match the requested mode")]
    ModeMismatch,
    #[error("weight matrix {name} must be symmetric and {rows}x{cols}")]
    BadWeight { name: String, rows: usize, cols: usize },
    #[error("own-control weight {name} is not positive definite")]
    NotPositiveDefinite { name: String },
    #[error("template rejected by bound scan: {detail}")]
    UnstableTemplate { detail: String },
}

/// Per-stage affine state-feedback law `u = gain * x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackLaw<R> {
    /// `control_dim x state_dim`, row-major rows.
    pub gain: Vec<Vec<R>>,
    pub offset: Vec<R>,
}

impl<R: Real> FeedbackLaw<R> {
    pub fn apply(&self, state: &[R]) -> Vec<R> {
        self.gain
            .iter()
            .zip(self.offset.iter())
            .map(|(row, off)| {
                row.iter()
                    .zip(state.iter())
                    .fold(*off, |acc, (g, x)| acc + *g * *x)
            })
            .collect()
    }

    pub(crate) fn check_dims(
        &self,
        player: usize,
        stage: usize,
        control_dim: usize,
        state_dim: usize,
    ) -> Result<(), GameError> {
        if self.gain.len() != control_dim || self.gain.iter().any(|r| r.len() != state_dim) {
            return Err(GameError::GainDim {
                player,
                stage,
                rows: self.gain.len(),
                cols: self.gain.first().map_or(0, |r| r.len()),
                expected_rows: control_dim,
                expected_cols: state_dim,
            });
        }
        if self.offset.len() != control_dim {
            return Err(GameError::OffsetDim {
                player,
                stage,
                got: self.offset.len(),
                expected: control_dim,
            });
        }
        Ok(())
    }
}

/// One player's strategy: an open-loop control sequence or per-stage feedback laws.
#[derive(Clone, Debug, PartialEq)]
pub enum PlayerStrategy<R> {
    /// `[stage][component]`
    OpenLoop(Vec<Vec<R>>),
    /// `[stage]`
    Feedback(Vec<FeedbackLaw<R>>),
}

impl<R> PlayerStrategy<R> {
    pub fn mode(&self) -> StrategyMode {
        match self {
            PlayerStrategy::OpenLoop(_) => StrategyMode::OpenLoop,
            PlayerStrategy::Feedback(_) => StrategyMode::LinearFeedback,
        }
    }
}

/// Joint strategy profile; all players share one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile<R> {
    players: Vec<PlayerStrategy<R>>,
}

impl<R: Real> StrategyProfile<R> {
    pub fn open_loop(controls: Vec<Vec<Vec<R>>>) -> Self {
        Self {
            players: controls.into_iter().map(PlayerStrategy::OpenLoop).collect(),
        }
    }

    pub fn feedback(laws: Vec<Vec<FeedbackLaw<R>>>) -> Self {
        Self {
            players: laws.into_iter().map(PlayerStrategy::Feedback).collect(),
        }
    }

    /// Build from per-player strategies, rejecting mixed modes.
    pub fn from_players(players: Vec<PlayerStrategy<R>>) -> Result<Self, GameError> {
        if let Some(first) = players.first() {
            let mode = first.mode();
            if players.iter().any(|p| p.mode() != mode) {
                return Err(GameError::ModeMismatch);
            }
        }
        Ok(Self { players })
    }

    pub fn mode(&self) -> StrategyMode {
        self.players.first().map_or(StrategyMode::OpenLoop, |p| p.mode())
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[PlayerStrategy<R>] {
        &self.players
    }

    pub fn player(&self, i: usize) -> &PlayerStrategy<R> {
        &self.players[i]
    }

    /// Copy of this profile with player `i`'s strategy replaced.
    pub fn with_player(&self, i: usize, strategy: PlayerStrategy<R>) -> Result<Self, GameError> {
        if i >= self.players.len() {
            return Err(GameError::PlayerIndex { player: i, num_players: self.players.len() });
        }
        if strategy.mode() != self.mode() {
            return Err(GameError::ModeMismatch);
        }
        let mut players = self.players.clone();
        players[i] = strategy;
        Ok(Self { players })
    }
}

/// Realized rollout of a profile: K+1 states and the controls actually played.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<R> {
    /// `[stage]`, length K+1; `states[0]` is the initial state.
    pub states: Vec<Vec<R>>,
    /// `[player][stage][component]`, K stages per player.
    pub realized_controls: Vec<Vec<Vec<R>>>,
}

/// Immutable N-player dynamic game. Safe to share across threads; all
/// callables must be pure.
#[derive(Clone)]
pub struct DynamicGame<R> {
    num_players: usize,
    horizon: usize,
    state_dim: usize,
    control_dims: Vec<usize>,
    transition: TransitionFn<R>,
    stage_costs: Vec<StageCostFn<R>>,
    terminal_costs: Vec<TerminalCostFn<R>>,
    initial_state: Vec<R>,
    /// `[player][stage]`, applied componentwise to that stage's control vector.
    control_bounds: Vec<Vec<Interval<R>>>,
}

impl<R: Real> std::fmt::Debug for DynamicGame<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DynamicGame")
            .field("num_players", &self.num_players)
            .field("horizon", &self.horizon)
            .field("state_dim", &self.state_dim)
            .field("control_dims", &self.control_dims)
            .field("initial_state", &self.initial_state)
            .finish_non_exhaustive()
    }
}

impl<R: Real> DynamicGame<R> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_players: usize,
        horizon: usize,
        state_dim: usize,
        control_dims: Vec<usize>,
        transition: TransitionFn<R>,
        stage_costs: Vec<StageCostFn<R>>,
        terminal_costs: Vec<TerminalCostFn<R>>,
        initial_state: Vec<R>,
        control_bounds: Vec<Vec<Interval<R>>>,
    ) -> Result<Self, GameError> {
        if num_players == 0 {
            return Err(GameError::InvalidDefinition("num_players must be positive".into()));
        }
        if state_dim == 0 {
            return Err(GameError::InvalidDefinition("state_dim must be positive".into()));
        }
        if control_dims.len() != num_players {
            return Err(GameError::InvalidDefinition(format!(
                "control_dims has {} entries, expected {num_players}",
                control_dims.len()
            )));
        }
        if control_dims.iter().any(|&m| m == 0) {
            return Err(GameError::InvalidDefinition("control dims must be positive".into()));
        }
        if stage_costs.len() != num_players || terminal_costs.len() != num_players {
            return Err(GameError::InvalidDefinition(format!(
                "expected {num_players} stage and terminal cost functions"
            )));
        }
        if initial_state.len() != state_dim {
            return Err(GameError::InvalidDefinition(format!(
                "initial state has dimension {}, expected {state_dim}",
                initial_state.len()
            )));
        }
        if control_bounds.len() != num_players
            || control_bounds.iter().any(|b| b.len() != horizon)
        {
            return Err(GameError::InvalidDefinition(
                "control_bounds must provide one interval per player per stage".into(),
            ));
        }
        Ok(Self {
            num_players,
            horizon,
            state_dim,
            control_dims,
            transition,
            stage_costs,
            terminal_costs,
            initial_state,
            control_bounds,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn control_dims(&self) -> &[usize] {
        &self.control_dims
    }

    pub fn initial_state(&self) -> &[R] {
        &self.initial_state
    }

    pub fn control_bounds(&self) -> &[Vec<Interval<R>>] {
        &self.control_bounds
    }

    fn check_profile(&self, profile: &StrategyProfile<R>) -> Result<(), GameError> {
        if profile.num_players() != self.num_players {
            return Err(GameError::ProfilePlayers {
                got: profile.num_players(),
                expected: self.num_players,
            });
        }
        for (i, strategy) in profile.players().iter().enumerate() {
            let m = self.control_dims[i];
            match strategy {
                PlayerStrategy::OpenLoop(controls) => {
                    if controls.len() != self.horizon {
                        return Err(GameError::ControlCount {
                            player: i,
                            got: controls.len(),
                            expected: self.horizon,
                        });
                    }
                    for (k, u) in controls.iter().enumerate() {
                        if u.len() != m {
                            return Err(GameError::ControlDim {
                                player: i,
                                stage: k,
                                got: u.len(),
                                expected: m,
                            });
                        }
                    }
                }
                PlayerStrategy::Feedback(laws) => {
                    if laws.len() != self.horizon {
                        return Err(GameError::ControlCount {
                            player: i,
                            got: laws.len(),
                            expected: self.horizon,
                        });
                    }
                    for (k, law) in laws.iter().enumerate() {
                        law.check_dims(i, k, m, self.state_dim)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Roll the profile forward through the dynamics.
    ///
    /// Feedback laws are applied to the realized state at each stage. Pure:
    /// equal inputs yield bitwise-equal trajectories.
    pub fn simulate(&self, profile: &StrategyProfile<R>) -> Result<Trajectory<R>, GameError> {
        self.check_profile(profile)?;
        let mut states = Vec::with_capacity(self.horizon + 1);
        states.push(self.initial_state.clone());
        let mut by_stage: Vec<Vec<Vec<R>>> = Vec::with_capacity(self.horizon);
        for k in 0..self.horizon {
            let x = states.last().expect("state history is non-empty");
            let controls: Vec<Vec<R>> = profile
                .players()
                .iter()
                .map(|strategy| match strategy {
                    PlayerStrategy::OpenLoop(u) => u[k].clone(),
                    PlayerStrategy::Feedback(laws) => laws[k].apply(x),
                })
                .collect();
            let next = (self.transition)(k, x, &controls);
            if next.len() != self.state_dim {
                return Err(GameError::StateDim {
                    stage: k,
                    got: next.len(),
                    expected: self.state_dim,
                });
            }
            states.push(next);
            by_stage.push(controls);
        }
        let realized_controls = (0..self.num_players)
            .map(|i| by_stage.iter().map(|stage| stage[i].clone()).collect())
            .collect();
        Ok(Trajectory { states, realized_controls })
    }

    fn cost_along(&self, traj: &Trajectory<R>, player: usize) -> Result<R, GameError> {
        let mut total = R::zero();
        for k in 0..self.horizon {
            let controls: Vec<Vec<R>> = (0..self.num_players)
                .map(|i| traj.realized_controls[i][k].clone())
                .collect();
            let g = (self.stage_costs[player])(k, &traj.states[k], &controls);
            if !g.is_finite() {
                return Err(GameError::NonFiniteCost {
                    player,
                    stage: Some(k),
                    term: "stage cost",
                });
            }
            total = total + g;
        }
        let h = (self.terminal_costs[player])(&traj.states[self.horizon]);
        if !h.is_finite() {
            return Err(GameError::NonFiniteCost { player, stage: None, term: "terminal cost" });
        }
        total = total + h;
        if !total.is_finite() {
            return Err(GameError::NonFiniteCost { player, stage: None, term: "total cost" });
        }
        Ok(total)
    }

    /// `J_i` along the simulated trajectory of `profile`.
    pub fn evaluate_cost(&self, profile: &StrategyProfile<R>, player: usize) -> Result<R, GameError> {
        if player >= self.num_players {
            return Err(GameError::PlayerIndex { player, num_players: self.num_players });
        }
        let traj = self.simulate(profile)?;
        self.cost_along(&traj, player)
    }

    /// All players' costs sharing a single trajectory simulation.
    pub fn evaluate_all_costs(&self, profile: &StrategyProfile<R>) -> Result<Vec<R>, GameError> {
        let traj = self.simulate(profile)?;
        (0..self.num_players).map(|i| self.cost_along(&traj, i)).collect()
    }
}
