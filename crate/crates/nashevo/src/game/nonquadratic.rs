//! Built-in two-player scalar-state template with non-quadratic costs.
//!
//! Stage cost for player i:
//!   `q_i x^2 + r_i u_i^2 + quartic_i u_i^4 + exp_i (exp(s x) - 1 - s x)`
//! with terminal cost `f_i x_K^2`. The exponential term is nonnegative and
//! vanishes (with its slope) at x = 0; setting the quartic and exponential
//! coefficients to zero degenerates the template to an LQ game.

use std::sync::Arc;

use crate::game::lq::LqGameSpec;
use crate::game::{DynamicGame, GameError};
use crate::linalg::Mat;
use crate::real::Real;
use crate::space::Interval;

#[derive(Clone, Debug)]
pub struct NonQuadraticSpec<R> {
    pub horizon: usize,
    /// Scalar state factor `a` in `x' = a x + b_1 u_1 + b_2 u_2`.
    pub state_factor: R,
    pub control_factors: [R; 2],
    pub state_weights: [R; 2],
    pub control_weights: [R; 2],
    pub quartic_weights: [R; 2],
    pub exp_weights: [R; 2],
    pub exp_rate: R,
    pub terminal_weights: [R; 2],
    pub initial_state: R,
    /// Shared control interval for both players and all stages.
    pub control_bound: Interval<R>,
}

impl<R: Real> Default for NonQuadraticSpec<R> {
    fn default() -> Self {
        Self {
            horizon: 2,
            state_factor: R::of(0.9),
            control_factors: [R::one(), R::one()],
            state_weights: [R::one(), R::one()],
            control_weights: [R::of(0.5), R::of(0.5)],
            quartic_weights: [R::of(0.1), R::of(0.1)],
            exp_weights: [R::of(0.25), R::of(0.25)],
            exp_rate: R::of(0.5),
            terminal_weights: [R::of(0.5), R::of(0.5)],
            initial_state: R::one(),
            control_bound: Interval::new(R::of(-2.0), R::of(2.0)).expect("static interval"),
        }
    }
}

impl<R: Real> NonQuadraticSpec<R> {
    /// Worst-case |x_k| reachable with in-bound controls, stage by stage.
    fn reachable_state_magnitudes(&self) -> Vec<R> {
        let u_max = self.control_bound.lo().abs().max(self.control_bound.hi().abs());
        let mut mags = Vec::with_capacity(self.horizon + 1);
        let mut x = self.initial_state.abs();
        mags.push(x);
        for _ in 0..self.horizon {
            x = self.state_factor.abs() * x
                + self.control_factors[0].abs() * u_max
                + self.control_factors[1].abs() * u_max;
            mags.push(x);
        }
        mags
    }

    fn validate(&self) -> Result<(), GameError> {
        if self.horizon == 0 {
            return Err(GameError::InvalidDefinition(
                "non-quadratic template needs at least one stage".into(),
            ));
        }
        // Bound scan: evaluate every cost term at the worst reachable state
        // and the largest in-bound control; reject if anything overflows.
        let u_max = self.control_bound.lo().abs().max(self.control_bound.hi().abs());
        let mags = self.reachable_state_magnitudes();
        for (k, x) in mags.iter().enumerate() {
            for i in 0..2 {
                let quad = self.state_weights[i] * *x * *x
                    + self.control_weights[i] * u_max * u_max;
                let quart = self.quartic_weights[i] * u_max.powi(4);
                let expo = self.exp_weights[i]
                    * ((self.exp_rate * *x).exp() + (-(self.exp_rate) * *x).exp());
                let terminal = self.terminal_weights[i] * *x * *x;
                let worst = quad + quart + expo + terminal;
                if !worst.is_finite() {
                    return Err(GameError::UnstableTemplate {
                        detail: format!(
                            "player {i} cost overflows at stage {k}: reachable |x| = {}, \
                             exp rate = {}",
                            x.as_f64(),
                            self.exp_rate.as_f64()
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// The LQ spec this template degenerates to when the non-quadratic
    /// coefficients are zero; `None` otherwise.
    pub fn lq_equivalent(&self) -> Option<LqGameSpec<R>> {
        let zero = R::zero();
        if self.quartic_weights != [zero, zero] || self.exp_weights != [zero, zero] {
            return None;
        }
        Some(LqGameSpec {
            horizon: self.horizon,
            state_dim: 1,
            control_dims: vec![1, 1],
            a: vec![Mat::scalar(self.state_factor); self.horizon],
            b: vec![
                vec![Mat::scalar(self.control_factors[0]); self.horizon],
                vec![Mat::scalar(self.control_factors[1]); self.horizon],
            ],
            state_weights: (0..2)
                .map(|i| vec![Mat::scalar(self.state_weights[i]); self.horizon])
                .collect(),
            control_weights: (0..2)
                .map(|i| vec![Mat::scalar(self.control_weights[i]); self.horizon])
                .collect(),
            terminal_weights: vec![
                Mat::scalar(self.terminal_weights[0]),
                Mat::scalar(self.terminal_weights[1]),
            ],
            initial_state: vec![self.initial_state],
            control_bounds: vec![self.control_bound; 2],
        })
    }

    pub fn build(&self) -> Result<DynamicGame<R>, GameError> {
        self.validate()?;
        let a = self.state_factor;
        let b = self.control_factors;
        let transition: crate::game::TransitionFn<R> =
            Arc::new(move |_, x, u| vec![a * x[0] + b[0] * u[0][0] + b[1] * u[1][0]]);
        let s = self.exp_rate;
        let stage_costs = (0..2)
            .map(|i| {
                let q = self.state_weights[i];
                let r = self.control_weights[i];
                let quart = self.quartic_weights[i];
                let e = self.exp_weights[i];
                let f: crate::game::StageCostFn<R> = Arc::new(move |_, x, u| {
                    let ui = u[i][0];
                    let sx = s * x[0];
                    q * x[0] * x[0]
                        + r * ui * ui
                        + quart * ui.powi(4)
                        + e * (sx.exp() - R::one() - sx)
                });
                f
            })
            .collect();
        let terminal_costs = (0..2)
            .map(|i| {
                let f = self.terminal_weights[i];
                let t: crate::game::TerminalCostFn<R> = Arc::new(move |x| f * x[0] * x[0]);
                t
            })
            .collect();
        DynamicGame::new(
            2,
            self.horizon,
            1,
            vec![1, 1],
            transition,
            stage_costs,
            terminal_costs,
            vec![self.initial_state],
            vec![vec![self.control_bound; self.horizon]; 2],
        )
    }
}
