//! Solver outputs shared by the GA and PSO paths.

use thiserror::Error;

use crate::encoding::EncodeError;
use crate::game::{GameError, StrategyProfile};
use crate::real::Real;

/// One convergence-trace entry, emitted per (iteration, player) after each
/// full co-evolutionary sweep. `best_cost` is the player's cost at the joint
/// best profile (not the transformed fitness); `stagnation` counts iterations
/// without meaningful improvement.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<R> {
    pub iteration: usize,
    pub player: usize,
    pub best_cost: R,
    pub mean_cost: R,
    pub stagnation: usize,
}

/// Final output of a solver run.
#[derive(Clone, Debug)]
pub struct SolveResult<R> {
    pub profile: StrategyProfile<R>,
    /// Per-player costs of `profile`; equal to the last trace rows.
    pub costs: Vec<R>,
    pub trace: Vec<TraceRow<R>>,
    pub seed: u64,
    /// Iterations (GA: generations) actually executed.
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum SolveError<R: Real> {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Encoding(#[from] EncodeError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("roulette selection requires nonnegative fitness with positive total ({detail}); recalibrate the fitness offset")]
    Selection { detail: String },
    #[error("crossover parents have different lengths: {a} vs {b}")]
    CrossoverLength { a: usize, b: usize },
    #[error("iteration {t} outside the inertia schedule 0..={t_max}")]
    IterationOutOfRange { t: usize, t_max: usize },
    #[error("solver aborted at iteration {iteration}, player {player}: {source}")]
    Aborted {
        source: GameError,
        iteration: usize,
        player: usize,
        /// Trace accumulated up to the failure.
        trace: Vec<TraceRow<R>>,
    },
}

/// Stall rule shared by both solvers: stop once every player's best-cost
/// series moved less than `tolerance` over the last `window` iterations.
pub(crate) fn stalled<R: Real>(history: &[Vec<R>], window: usize, tolerance: R) -> bool {
    if window == 0 || history.len() <= window {
        return false;
    }
    let players = history[0].len();
    let recent = &history[history.len() - window - 1..];
    (0..players).all(|i| {
        let mut lo = R::infinity();
        let mut hi = -R::infinity();
        for row in recent {
            lo = lo.min(row[i]);
            hi = hi.max(row[i]);
        }
        hi - lo < tolerance
    })
}
