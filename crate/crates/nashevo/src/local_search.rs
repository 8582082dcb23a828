//! Derivative-free simplex minimizer used by hybrid PSO refinement and by the
//! best-response verifier.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("objective is not finite at the start point")]
    NonFiniteStart,
    #[error("start point must have at least one dimension")]
    EmptyStart,
}

#[derive(Clone, Debug)]
pub struct SimplexConfig<R> {
    pub max_iterations: usize,
    pub reflection: R,
    pub expansion: R,
    pub contraction: R,
    pub shrink: R,
    /// Initial per-axis step as a fraction of the coordinate magnitude.
    pub initial_step_fraction: R,
    /// Floor on the initial per-axis step.
    pub min_initial_step: R,
    /// Converged when the simplex diameter drops below this ...
    pub diameter_tolerance: R,
    /// ... and the best-to-worst value spread below this.
    pub value_tolerance: R,
}

impl<R: Real> Default for SimplexConfig<R> {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            reflection: R::one(),
            expansion: R::of(2.0),
            contraction: R::of(0.5),
            shrink: R::of(0.5),
            initial_step_fraction: R::of(0.05),
            min_initial_step: R::of(0.025),
            diameter_tolerance: R::of(1e-10),
            value_tolerance: R::of(1e-12),
        }
    }
}

impl<R: Real> SimplexConfig<R> {
    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.reflection <= R::zero() {
            return Err(format!("reflection must be > 0, got {}", self.reflection));
        }
        if self.expansion <= R::one() {
            return Err(format!("expansion must be > 1, got {}", self.expansion));
        }
        if self.contraction <= R::zero() || self.contraction >= R::one() {
            return Err(format!("contraction must be in (0, 1), got {}", self.contraction));
        }
        if self.shrink <= R::zero() || self.shrink >= R::one() {
            return Err(format!("shrink must be in (0, 1), got {}", self.shrink));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome<R> {
    pub point: Vec<R>,
    pub value: R,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Non-finite values are treated as +inf so the vertex is rejected.
fn guard<R: Real>(v: R) -> R {
    if v.is_finite() {
        v
    } else {
        R::infinity()
    }
}

/// Nelder-Mead minimization from `start`.
///
/// Deterministic: no randomness in the simplex path, ties broken by vertex
/// index. The returned value never exceeds the objective at `start`.
pub fn simplex_minimize<R: Real, F: Fn(&[R]) -> R>(
    objective: F,
    start: &[R],
    config: &SimplexConfig<R>,
) -> Result<SimplexOutcome<R>, SimplexError> {
    let n = start.len();
    if n == 0 {
        return Err(SimplexError::EmptyStart);
    }
    let f0 = objective(start);
    if !f0.is_finite() {
        return Err(SimplexError::NonFiniteStart);
    }

    let mut simplex: Vec<Vec<R>> = Vec::with_capacity(n + 1);
    let mut values: Vec<R> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    values.push(f0);
    for axis in 0..n {
        let mut vertex = start.to_vec();
        let step = (config.initial_step_fraction * vertex[axis].abs())
            .max(config.min_initial_step);
        vertex[axis] = vertex[axis] + step;
        values.push(guard(objective(&vertex)));
        simplex.push(vertex);
    }

    let mut iterations_used = 0;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        // Order vertices best-first, stable in the original index.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| {
            values[a].partial_cmp(&values[b]).expect("guarded values are comparable")
                .then(a.cmp(&b))
        });
        let reordered: Vec<Vec<R>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<R> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let spread = values[n] - values[0];
        let mut diameter = R::zero();
        for vertex in simplex.iter().skip(1) {
            let dist = vertex
                .iter()
                .zip(simplex[0].iter())
                .fold(R::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b))
                .sqrt();
            diameter = diameter.max(dist);
        }
        if diameter <= config.diameter_tolerance && spread <= config.value_tolerance {
            converged = true;
            break;
        }

        iterations_used += 1;

        // Centroid of all but the worst vertex.
        let mut centroid = vec![R::zero(); n];
        for vertex in simplex.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(vertex.iter()) {
                *c = *c + *x;
            }
        }
        let inv = R::one() / R::of(n as f64);
        for c in centroid.iter_mut() {
            *c = *c * inv;
        }

        let worst = simplex[n].clone();
        let reflect: Vec<R> = centroid
            .iter()
            .zip(worst.iter())
            .map(|(c, w)| *c + config.reflection * (*c - *w))
            .collect();
        let f_reflect = guard(objective(&reflect));

        if f_reflect < values[0] {
            let expand: Vec<R> = centroid
                .iter()
                .zip(reflect.iter())
                .map(|(c, r)| *c + config.expansion * (*r - *c))
                .collect();
            let f_expand = guard(objective(&expand));
            if f_expand < f_reflect {
                simplex[n] = expand;
                values[n] = f_expand;
            } else {
                simplex[n] = reflect;
                values[n] = f_reflect;
            }
        } else if f_reflect < values[n - 1] {
            simplex[n] = reflect;
            values[n] = f_reflect;
        } else {
            let (candidate, f_candidate) = if f_reflect < values[n] {
                // Outside contraction.
                let point: Vec<R> = centroid
                    .iter()
                    .zip(reflect.iter())
                    .map(|(c, r)| *c + config.contraction * (*r - *c))
                    .collect();
                let value = guard(objective(&point));
                (point, value)
            } else {
                // Inside contraction.
                let point: Vec<R> = centroid
                    .iter()
                    .zip(worst.iter())
                    .map(|(c, w)| *c - config.contraction * (*c - *w))
                    .collect();
                let value = guard(objective(&point));
                (point, value)
            };
            if f_candidate < values[n].min(f_reflect) {
                simplex[n] = candidate;
                values[n] = f_candidate;
            } else {
                // Shrink toward the best vertex, which stays untouched.
                for idx in 1..=n {
                    let shrunk: Vec<R> = simplex[0]
                        .iter()
                        .zip(simplex[idx].iter())
                        .map(|(b, v)| *b + config.shrink * (*v - *b))
                        .collect();
                    values[idx] = guard(objective(&shrunk));
                    simplex[idx] = shrunk;
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    Ok(SimplexOutcome {
        point: simplex[best].clone(),
        value: values[best],
        iterations_used,
        converged,
    })
}
