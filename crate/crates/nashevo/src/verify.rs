//! Equilibrium certification by best-response search, plus the exact
//! open-loop oracle for linear-quadratic games.
//!
//! The certificate is one-sided: a reported gap is a lower bound on the true
//! improvement a player could find, so "not certified" is conclusive while
//! "certified" is only as strong as the search budget, which the report
//! carries alongside the gaps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::lq::LqGameSpec;
use crate::game::{DynamicGame, GameError, PlayerStrategy, StrategyProfile};
use crate::linalg::{solve, LinalgError, Mat};
use crate::local_search::{simplex_minimize, SimplexConfig, SimplexError};
use crate::real::Real;
use crate::space::SearchSpace;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("best-response search failed: {0}")]
    Search(#[from] SimplexError),
    #[error(
        "first-order-condition system is singular (condition estimate {condition_estimate:.3e}); \
         the equilibrium may be non-unique or degenerate"
    )]
    SingularFocSystem { condition_estimate: f64 },
}

/// Search budget for one best-response gap computation.
#[derive(Clone, Debug)]
pub struct BrBudget<R> {
    /// Uniform-random restarts inside bounds, in addition to the search
    /// started from the profile's own strategy.
    pub multistarts: usize,
    pub simplex: SimplexConfig<R>,
    pub rng_seed: u64,
}

impl<R: Real> Default for BrBudget<R> {
    fn default() -> Self {
        Self { multistarts: 8, simplex: SimplexConfig::default(), rng_seed: 0 }
    }
}

/// One player's certification record.
#[derive(Clone, Debug)]
pub struct PlayerGap<R> {
    /// `max(0, J_i(profile) - best deviation cost found)`.
    pub gap: R,
    /// The deviating strategy achieving the recorded gap (bounds-clamped).
    pub deviation: PlayerStrategy<R>,
    /// Cost of the deviation when played against the frozen opponents.
    pub deviation_cost: R,
    pub starts: usize,
    pub simplex_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct NashReport<R> {
    pub gaps: Vec<PlayerGap<R>>,
    pub tolerance: R,
    pub certified: bool,
    pub multistarts: usize,
}

impl<R: Real> NashReport<R> {
    pub fn max_gap(&self) -> R {
        self.gaps.iter().fold(R::zero(), |acc, g| acc.max(g.gap))
    }

    /// Players whose gap exceeds the tolerance.
    pub fn violating_players(&self) -> Vec<usize> {
        self.gaps
            .iter()
            .enumerate()
            .filter(|(_, g)| g.gap > self.tolerance)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Largest unilateral cost improvement found for `player`, with the deviation
/// achieving it. The search runs a simplex from the current strategy plus
/// `multistarts` random restarts; the result is a lower bound on the true
/// improvement potential.
pub fn best_response_gap<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    profile: &StrategyProfile<R>,
    player: usize,
    budget: &BrBudget<R>,
) -> Result<PlayerGap<R>, VerifyError> {
    if player >= game.num_players() {
        return Err(GameError::PlayerIndex { player, num_players: game.num_players() }.into());
    }
    let base_cost = game.evaluate_cost(profile, player)?;
    let joint = space.vector_from(profile)?;
    let range = space.player_slice(player);

    let objective = |slice: &[R]| -> R {
        let mut candidate = joint.clone();
        candidate[range.clone()].copy_from_slice(slice);
        let p = space.profile_from(&space.clamped(&candidate));
        match game.evaluate_cost(&p, player) {
            Ok(c) => c,
            Err(_) => R::infinity(),
        }
    };

    // Deterministic per-player stream: multistart k is identical whether the
    // budget asks for k+1 or more starts, so gaps grow monotonically with the
    // multistart count.
    let mut rng = ChaCha8Rng::seed_from_u64(
        budget.rng_seed.wrapping_add((player as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    );
    let slice_bounds = &space.bounds()[range.clone()];

    let mut starts: Vec<Vec<R>> = Vec::with_capacity(budget.multistarts + 1);
    starts.push(joint[range.clone()].to_vec());
    for _ in 0..budget.multistarts {
        starts.push(slice_bounds.iter().map(|b| b.sample(&mut rng)).collect());
    }

    let mut best_point = starts[0].clone();
    let mut best_value = objective(&starts[0]);
    let mut iterations = 0;
    for start in &starts {
        match simplex_minimize(&objective, start, &budget.simplex) {
            Ok(outcome) => {
                iterations += outcome.iterations_used;
                if outcome.value < best_value {
                    best_value = outcome.value;
                    best_point = outcome.point;
                }
            }
            Err(SimplexError::NonFiniteStart) => {
                log::warn!(
                    "best-response start rejected for player {player}: objective not finite"
                );
            }
            Err(e) => return Err(e.into()),
        }
    }

    let gap = (base_cost - best_value).max(R::zero());
    let clamped_best = {
        let mut candidate = joint.clone();
        candidate[range.clone()].copy_from_slice(&best_point);
        space.clamped(&candidate)[range.clone()].to_vec()
    };
    Ok(PlayerGap {
        gap,
        deviation: space.player_strategy_from(player, &clamped_best),
        deviation_cost: best_value,
        starts: starts.len(),
        simplex_iterations: iterations,
    })
}

/// Run the best-response check for every player; certified iff every gap is
/// within `tolerance`.
pub fn certify_nash<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    profile: &StrategyProfile<R>,
    tolerance: R,
    budget: &BrBudget<R>,
) -> Result<NashReport<R>, VerifyError> {
    if tolerance <= R::zero() {
        return Err(VerifyError::BadTolerance(tolerance.as_f64()));
    }
    let gaps = (0..game.num_players())
        .map(|player| best_response_gap(game, space, profile, player, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let certified = gaps.iter().all(|g| g.gap <= tolerance);
    Ok(NashReport { gaps, tolerance, certified, multistarts: budget.multistarts })
}

/// Exact open-loop Nash equilibrium of an LQ game.
///
/// Each `J_i` is quadratic in the stacked joint control vector, so the
/// simultaneous stationarity conditions `dJ_i/du_i = 0` form one square
/// linear system; its solution is returned as an open-loop profile.
pub fn lq_openloop_nash<R: Real>(spec: &LqGameSpec<R>) -> Result<StrategyProfile<R>, VerifyError> {
    spec.build()?; // borrow the builder's validation
    let players = spec.num_players();
    let horizon = spec.horizon;
    let n = spec.state_dim;

    // Joint control layout: player-major, stage-major, component.
    let mut offsets = Vec::with_capacity(players);
    let mut total = 0usize;
    for i in 0..players {
        offsets.push(total);
        total += horizon * spec.control_dims[i];
    }
    if total == 0 {
        return Ok(StrategyProfile::open_loop(vec![vec![]; players]));
    }

    // x_k = reach[k] * u + free[k]
    let mut reach: Vec<Mat<R>> = Vec::with_capacity(horizon + 1);
    let mut free: Vec<Vec<R>> = Vec::with_capacity(horizon + 1);
    reach.push(Mat::zeros(n, total));
    free.push(spec.initial_state.clone());
    for k in 0..horizon {
        let mut next = spec.a[k].mul_mat(&reach[k]);
        for i in 0..players {
            let m = spec.control_dims[i];
            let col0 = offsets[i] + k * m;
            let b = &spec.b[i][k];
            for r in 0..n {
                for c in 0..m {
                    next.set(r, col0 + c, next.at(r, col0 + c) + b.at(r, c));
                }
            }
        }
        reach.push(next);
        free.push(spec.a[k].mul_vec(&free[k]));
    }

    // Stationarity rows for player i: for every stage state weight at k >= 1
    // and the terminal weight, accumulate (reach_k^i)' W (reach_k u + free_k),
    // plus the own-control weight block.
    let mut system = Mat::zeros(total, total);
    let mut rhs = vec![R::zero(); total];
    for i in 0..players {
        let m = spec.control_dims[i];
        let row0 = offsets[i];
        for k in 1..=horizon {
            let weight = if k < horizon {
                spec.state_weights[i][k].clone()
            } else {
                spec.terminal_weights[i].clone()
            };
            // Select player i's columns of reach[k].
            let mut own_cols = Mat::zeros(n, horizon * m);
            for r in 0..n {
                for c in 0..horizon * m {
                    own_cols.set(r, c, reach[k].at(r, offsets[i] + c));
                }
            }
            let wt = own_cols.transpose().mul_mat(&weight);
            let block = wt.mul_mat(&reach[k]);
            for r in 0..horizon * m {
                for c in 0..total {
                    system.set(row0 + r, c, system.at(row0 + r, c) + block.at(r, c));
                }
            }
            let forced = wt.mul_vec(&free[k]);
            for (r, f) in forced.iter().enumerate() {
                rhs[row0 + r] = rhs[row0 + r] - *f;
            }
        }
        for k in 0..horizon {
            let r_w = &spec.control_weights[i][k];
            for a in 0..m {
                for b in 0..m {
                    let row = row0 + k * m + a;
                    let col = row0 + k * m + b;
                    system.set(row, col, system.at(row, col) + r_w.at(a, b));
                }
            }
        }
    }

    let joint = solve(&system, &rhs).map_err(|e| match e {
        LinalgError::Singular { pivot_ratio } => {
            VerifyError::SingularFocSystem { condition_estimate: pivot_ratio }
        }
        other => VerifyError::SingularFocSystem {
            condition_estimate: {
                log::warn!("unexpected linear solve failure: {other}");
                0.0
            },
        },
    })?;

    let controls = (0..players)
        .map(|i| {
            let m = spec.control_dims[i];
            (0..horizon)
                .map(|k| joint[offsets[i] + k * m..offsets[i] + (k + 1) * m].to_vec())
                .collect()
        })
        .collect();
    Ok(StrategyProfile::open_loop(controls))
}
