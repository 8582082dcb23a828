//! Linear-quadratic game construction.
//!
//! Dynamics `x_{k+1} = A_k x_k + sum_i B_{i,k} u_{i,k}` with per-player costs
//! `J_i = sum_k (x_k' Q_{i,k} x_k + u_{i,k}' R_{i,k} u_{i,k}) + x_K' F_i x_K`.
//! The stage weight at k = 0 only shifts costs by a constant (x_0 is fixed),
//! so the built-in instances leave it zero.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{DynamicGame, GameError};
use crate::linalg::Mat;
use crate::real::Real;
use crate::space::Interval;

/// Full parameterization of an LQ game.
#[derive(Clone, Debug)]
pub struct LqGameSpec<R> {
    pub horizon: usize,
    pub state_dim: usize,
    pub control_dims: Vec<usize>,
    /// `[stage]`, each `state_dim x state_dim`.
    pub a: Vec<Mat<R>>,
    /// `[player][stage]`, each `state_dim x control_dim_i`.
    pub b: Vec<Vec<Mat<R>>>,
    /// `[player][stage]` state weights applied to `x_k`, positive semidefinite.
    pub state_weights: Vec<Vec<Mat<R>>>,
    /// `[player][stage]` own-control weights, positive definite.
    pub control_weights: Vec<Vec<Mat<R>>>,
    /// `[player]` terminal weights applied to `x_K`, positive semidefinite.
    pub terminal_weights: Vec<Mat<R>>,
    pub initial_state: Vec<R>,
    /// One interval per player, applied to every stage and component.
    pub control_bounds: Vec<Interval<R>>,
}

impl<R: Real> LqGameSpec<R> {
    pub fn num_players(&self) -> usize {
        self.b.len()
    }

    /// Minimal two-player single-stage scalar instance.
    ///
    /// `x_1 = x_0 + u_1 + u_2`, `J_i = x_1^2 + u_i^2`, `x_0 = 1`. The
    /// first-order conditions `4u_1 + 2u_2 + 2 = 0`, `2u_1 + 4u_2 + 2 = 0`
    /// give the open-loop equilibrium `u = (-1/3, -1/3)` with costs `2/9`.
    pub fn demo_two_player() -> Self {
        let one = || Mat::scalar(R::one());
        let zero = || Mat::scalar(R::zero());
        Self {
            horizon: 1,
            state_dim: 1,
            control_dims: vec![1, 1],
            a: vec![one()],
            b: vec![vec![one()], vec![one()]],
            state_weights: vec![vec![zero()], vec![zero()]],
            control_weights: vec![vec![one()], vec![one()]],
            terminal_weights: vec![one(), one()],
            initial_state: vec![R::one()],
            control_bounds: vec![
                Interval::new(R::of(-2.0), R::of(2.0)).expect("static interval"),
                Interval::new(R::of(-2.0), R::of(2.0)).expect("static interval"),
            ],
        }
    }

    /// Seeded scalar-state instance with strictly convex per-player objectives.
    ///
    /// Coefficient ranges keep the best-response interaction contractive, so
    /// the open-loop equilibrium is unique and interior to the bounds.
    pub fn random_strictly_convex(num_players: usize, horizon: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: f64, hi: f64| -> R {
            let u: f64 = rng.random();
            R::of(lo + u * (hi - lo))
        };
        let a = (0..horizon).map(|_| Mat::scalar(draw(0.7, 1.1))).collect();
        let b = (0..num_players)
            .map(|_| (0..horizon).map(|_| Mat::scalar(draw(0.6, 1.0))).collect())
            .collect();
        let state_weights = (0..num_players)
            .map(|_| {
                (0..horizon)
                    .map(|k| {
                        if k == 0 {
                            Mat::scalar(R::zero())
                        } else {
                            Mat::scalar(draw(0.1, 0.3))
                        }
                    })
                    .collect()
            })
            .collect();
        let control_weights = (0..num_players)
            .map(|_| (0..horizon).map(|_| Mat::scalar(draw(1.0, 2.0))).collect())
            .collect();
        let terminal_weights = (0..num_players).map(|_| Mat::scalar(draw(0.2, 0.5))).collect();
        let initial_state = vec![draw(0.5, 0.9)];
        Self {
            horizon,
            state_dim: 1,
            control_dims: vec![1; num_players],
            a,
            b,
            state_weights,
            control_weights,
            terminal_weights,
            initial_state,
            control_bounds: vec![
                Interval::new(R::of(-3.0), R::of(3.0)).expect("static interval");
                num_players
            ],
        }
    }

    fn validate(&self) -> Result<(), GameError> {
        let n = self.state_dim;
        let players = self.num_players();
        if players == 0 {
            return Err(GameError::InvalidDefinition("LQ spec has no players".into()));
        }
        if self.control_dims.len() != players
            || self.state_weights.len() != players
            || self.control_weights.len() != players
            || self.terminal_weights.len() != players
            || self.control_bounds.len() != players
        {
            return Err(GameError::InvalidDefinition(
                "LQ spec per-player lists must all have one entry per player".into(),
            ));
        }
        if self.a.len() != self.horizon {
            return Err(GameError::InvalidDefinition(format!(
                "LQ spec provides {} A matrices, expected {}",
                self.a.len(),
                self.horizon
            )));
        }
        if self.initial_state.len() != n {
            return Err(GameError::InvalidDefinition(format!(
                "LQ initial state has dimension {}, expected {n}",
                self.initial_state.len()
            )));
        }
        for (k, a) in self.a.iter().enumerate() {
            if a.rows() != n || a.cols() != n {
                return Err(GameError::InvalidDefinition(format!(
                    "A[{k}] must be {n}x{n}"
                )));
            }
        }
        for i in 0..players {
            let m = self.control_dims[i];
            if self.b[i].len() != self.horizon
                || self.state_weights[i].len() != self.horizon
                || self.control_weights[i].len() != self.horizon
            {
                return Err(GameError::InvalidDefinition(format!(
                    "player {i} must provide one B, Q, and R matrix per stage"
                )));
            }
            for (k, b) in self.b[i].iter().enumerate() {
                if b.rows() != n || b.cols() != m {
                    return Err(GameError::InvalidDefinition(format!(
                        "B[{i}][{k}] must be {n}x{m}"
                    )));
                }
            }
            for (k, q) in self.state_weights[i].iter().enumerate() {
                if q.rows() != n || q.cols() != n || !q.is_symmetric() {
                    return Err(GameError::BadWeight {
                        name: format!("Q[{i}][{k}]"),
                        rows: n,
                        cols: n,
                    });
                }
            }
            for (k, r) in self.control_weights[i].iter().enumerate() {
                if r.rows() != m || r.cols() != m || !r.is_symmetric() {
                    return Err(GameError::BadWeight {
                        name: format!("R[{i}][{k}]"),
                        rows: m,
                        cols: m,
                    });
                }
                if r.cholesky().is_none() {
                    return Err(GameError::NotPositiveDefinite { name: format!("R[{i}][{k}]") });
                }
            }
            let f = &self.terminal_weights[i];
            if f.rows() != n || f.cols() != n || !f.is_symmetric() {
                return Err(GameError::BadWeight { name: format!("F[{i}]"), rows: n, cols: n });
            }
        }
        Ok(())
    }

    /// Construct the dynamic game realizing this spec.
    pub fn build(&self) -> Result<DynamicGame<R>, GameError> {
        self.validate()?;
        let players = self.num_players();
        let a = self.a.clone();
        let b = self.b.clone();
        let transition: crate::game::TransitionFn<R> = {
            let a = a.clone();
            let b = b.clone();
            Arc::new(move |k, x, u| {
                let mut next = a[k].mul_vec(x);
                for (i, ui) in u.iter().enumerate() {
                    let contrib = b[i][k].mul_vec(ui);
                    for (n, c) in next.iter_mut().zip(contrib.iter()) {
                        *n = *n + *c;
                    }
                }
                next
            })
        };
        let stage_costs = (0..players)
            .map(|i| {
                let q = self.state_weights[i].clone();
                let r = self.control_weights[i].clone();
                let f: crate::game::StageCostFn<R> = Arc::new(move |k, x, u| {
                    q[k].quad_form(x) + r[k].quad_form(&u[i])
                });
                f
            })
            .collect();
        let terminal_costs = (0..players)
            .map(|i| {
                let f = self.terminal_weights[i].clone();
                let t: crate::game::TerminalCostFn<R> = Arc::new(move |x| f.quad_form(x));
                t
            })
            .collect();
        let bounds = self
            .control_bounds
            .iter()
            .map(|b| vec![*b; self.horizon])
            .collect();
        DynamicGame::new(
            players,
            self.horizon,
            self.state_dim,
            self.control_dims.clone(),
            transition,
            stage_costs,
            terminal_costs,
            self.initial_state.clone(),
            bounds,
        )
    }
}
