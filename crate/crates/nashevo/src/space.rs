//! Decision-variable layout shared by the solvers, the encoder, and the verifier.
//!
//! A [`SearchSpace`] flattens a strategy profile into one real vector: open-loop
//! controls player by player, stage by stage, or linear feedback parameters
//! (gain entries row-major, then offsets) in feedback mode. All solvers operate
//! on this vector and clamp it into bounds at evaluation time.

use std::ops::Range;

use rand::Rng;

use crate::game::{DynamicGame, FeedbackLaw, GameError, PlayerStrategy, StrategyProfile};
use crate::real::Real;

/// Non-empty closed interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<R> {
    lo: R,
    hi: R,
}

impl<R: Real> Interval<R> {
    pub fn new(lo: R, hi: R) -> Result<Self, GameError> {
        if !(lo <= hi) {
            return Err(GameError::EmptyInterval {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        Ok(Self { lo, hi })
    }

    /// Symmetric interval `[-half_width, half_width]`.
    pub fn symmetric(half_width: R) -> Result<Self, GameError> {
        Self::new(-half_width, half_width)
    }

    pub fn lo(&self) -> R {
        self.lo
    }

    pub fn hi(&self) -> R {
        self.hi
    }

    pub fn width(&self) -> R {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: R) -> R {
        if x < self.lo {
            self.lo
        } else if x > self.hi {
            self.hi
        } else {
            x
        }
    }

    pub fn contains(&self, x: R) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Uniform sample; the RNG draw itself happens in `f64`.
    pub fn sample(&self, rng: &mut impl Rng) -> R {
        let u: f64 = rng.random();
        self.lo + R::of(u) * (self.hi - self.lo)
    }
}

/// Information structure of a strategy profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyMode {
    /// One control vector per player per stage, fixed at time zero.
    OpenLoop,
    /// Per-stage affine state feedback `u = G x + b` per player.
    LinearFeedback,
}

/// Flattened decision-variable view of a game's strategy profiles.
#[derive(Clone, Debug)]
pub struct SearchSpace<R> {
    mode: StrategyMode,
    horizon: usize,
    state_dim: usize,
    control_dims: Vec<usize>,
    slices: Vec<Range<usize>>,
    bounds: Vec<Interval<R>>,
}

impl<R: Real> SearchSpace<R> {
    /// Open-loop space: per-player variables are `horizon * control_dim`
    /// scalars bounded by the game's control bounds.
    pub fn open_loop(game: &DynamicGame<R>) -> Self {
        let mut slices = Vec::with_capacity(game.num_players());
        let mut bounds = Vec::new();
        let mut offset = 0;
        for i in 0..game.num_players() {
            let m = game.control_dims()[i];
            let start = offset;
            for k in 0..game.horizon() {
                let b = game.control_bounds()[i][k];
                for _ in 0..m {
                    bounds.push(b);
                }
            }
            offset += game.horizon() * m;
            slices.push(start..offset);
        }
        Self {
            mode: StrategyMode::OpenLoop,
            horizon: game.horizon(),
            state_dim: game.state_dim(),
            control_dims: game.control_dims().to_vec(),
            slices,
            bounds,
        }
    }

    /// Feedback space: per player per stage, `control_dim * state_dim` gain
    /// entries followed by `control_dim` offsets, all bounded by `param_bound`.
    pub fn linear_feedback(game: &DynamicGame<R>, param_bound: Interval<R>) -> Self {
        let n = game.state_dim();
        let mut slices = Vec::with_capacity(game.num_players());
        let mut bounds = Vec::new();
        let mut offset = 0;
        for i in 0..game.num_players() {
            let m = game.control_dims()[i];
            let per_stage = m * n + m;
            let start = offset;
            for _ in 0..game.horizon() * per_stage {
                bounds.push(param_bound);
            }
            offset += game.horizon() * per_stage;
            slices.push(start..offset);
        }
        Self {
            mode: StrategyMode::LinearFeedback,
            horizon: game.horizon(),
            state_dim: n,
            control_dims: game.control_dims().to_vec(),
            slices,
            bounds,
        }
    }

    pub fn mode(&self) -> StrategyMode {
        self.mode
    }

    pub fn num_players(&self) -> usize {
        self.slices.len()
    }

    pub fn total_dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn player_slice(&self, player: usize) -> Range<usize> {
        self.slices[player].clone()
    }

    pub fn player_slices(&self) -> &[Range<usize>] {
        &self.slices
    }

    pub fn bounds(&self) -> &[Interval<R>] {
        &self.bounds
    }

    pub fn clamp_in_place(&self, v: &mut [R]) {
        assert_eq!(v.len(), self.total_dim(), "clamp dimension mismatch");
        for (x, b) in v.iter_mut().zip(self.bounds.iter()) {
            *x = b.clamp(*x);
        }
    }

    pub fn clamped(&self, v: &[R]) -> Vec<R> {
        let mut out = v.to_vec();
        self.clamp_in_place(&mut out);
        out
    }

    /// Uniform sample of a full joint vector within bounds.
    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Vec<R> {
        self.bounds.iter().map(|b| b.sample(rng)).collect()
    }

    /// Materialize one player's strategy from its variable slice.
    pub fn player_strategy_from(&self, player: usize, values: &[R]) -> PlayerStrategy<R> {
        let m = self.control_dims[player];
        assert_eq!(
            values.len(),
            self.slices[player].len(),
            "player slice dimension mismatch"
        );
        match self.mode {
            StrategyMode::OpenLoop => {
                let controls = (0..self.horizon)
                    .map(|k| values[k * m..(k + 1) * m].to_vec())
                    .collect();
                PlayerStrategy::OpenLoop(controls)
            }
            StrategyMode::LinearFeedback => {
                let n = self.state_dim;
                let per_stage = m * n + m;
                let laws = (0..self.horizon)
                    .map(|k| {
                        let base = k * per_stage;
                        let gain = (0..m)
                            .map(|r| values[base + r * n..base + (r + 1) * n].to_vec())
                            .collect();
                        let offset = values[base + m * n..base + per_stage].to_vec();
                        FeedbackLaw { gain, offset }
                    })
                    .collect();
                PlayerStrategy::Feedback(laws)
            }
        }
    }

    /// Materialize a full profile from a joint vector.
    pub fn profile_from(&self, v: &[R]) -> StrategyProfile<R> {
        assert_eq!(v.len(), self.total_dim(), "profile dimension mismatch");
        let players = (0..self.num_players())
            .map(|i| self.player_strategy_from(i, &v[self.slices[i].clone()]))
            .collect();
        StrategyProfile::from_players(players).expect("uniform mode by construction")
    }

    /// Flatten a profile into the joint vector; errors on mode or shape mismatch.
    pub fn vector_from(&self, profile: &StrategyProfile<R>) -> Result<Vec<R>, GameError> {
        if profile.mode() != self.mode {
            return Err(GameError::ModeMismatch);
        }
        if profile.num_players() != self.num_players() {
            return Err(GameError::ProfilePlayers {
                got: profile.num_players(),
                expected: self.num_players(),
            });
        }
        let mut out = Vec::with_capacity(self.total_dim());
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
                        out.extend_from_slice(u);
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
                        for row in &law.gain {
                            out.extend_from_slice(row);
                        }
                        out.extend_from_slice(&law.offset);
                    }
                }
            }
        }
        Ok(out)
    }
}
