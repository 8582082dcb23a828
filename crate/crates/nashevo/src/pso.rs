//! Global-best particle swarm over joint strategy vectors, with linear inertia
//! decay, velocity clamping, per-player co-evolutionary updates, optional
//! simplex refinement (hybrid mode), and stagnation-triggered mutation.

use std::ops::Range;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::game::{DynamicGame, GameError};
use crate::local_search::{simplex_minimize, SimplexConfig};
use crate::real::Real;
use crate::result::{stalled, SolveError, SolveResult, TraceRow};
use crate::space::SearchSpace;

#[derive(Clone, Debug)]
pub struct PsoConfig<R> {
    pub swarm_size: usize,
    /// Cognitive acceleration; guidance is c1 + c2 < 4.
    pub c1: R,
    /// Social acceleration.
    pub c2: R,
    pub omega_max: R,
    pub omega_min: R,
    pub t_max: usize,
    /// Explicit velocity clamp; when `None` the clamp is
    /// `v_max_fraction * bound width` per dimension.
    pub v_max: Option<R>,
    pub v_max_fraction: R,
    /// Simplex steps per refinement; 0 disables hybrid mode.
    pub hybrid_iter: usize,
    /// Refine only the iteration's best particle instead of all of them.
    pub refine_best_only: bool,
    pub simplex: SimplexConfig<R>,
    /// Iterations without any gbest improvement before mutation fires.
    pub stagnation_window: usize,
    /// Fraction of particles re-seeded on stagnation.
    pub mutation_fraction: f64,
    /// Draw r1, r2 per dimension instead of per particle update.
    pub per_dimension_draws: bool,
    pub stall_window: usize,
    pub stall_tolerance: R,
    pub parallel_eval: bool,
    pub rng_seed: u64,
}

impl<R: Real> Default for PsoConfig<R> {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            c1: R::of(1.8),
            c2: R::of(1.8),
            omega_max: R::of(0.9),
            omega_min: R::of(0.4),
            t_max: 1000,
            v_max: None,
            v_max_fraction: R::of(0.2),
            hybrid_iter: 0,
            refine_best_only: false,
            simplex: SimplexConfig::default(),
            stagnation_window: 20,
            mutation_fraction: 0.2,
            per_dimension_draws: false,
            stall_window: 150,
            stall_tolerance: R::of(1e-10),
            parallel_eval: false,
            rng_seed: 0,
        }
    }
}

impl<R: Real> PsoConfig<R> {
    pub fn validate(&self) -> Result<(), SolveError<R>> {
        if self.swarm_size == 0 {
            return Err(SolveError::InvalidConfig("swarm_size must be positive".into()));
        }
        if self.t_max == 0 {
            return Err(SolveError::InvalidConfig("t_max must be at least 1".into()));
        }
        if self.omega_min > self.omega_max {
            return Err(SolveError::InvalidConfig(format!(
                "omega_min ({}) must not exceed omega_max ({})",
                self.omega_min, self.omega_max
            )));
        }
        if let Some(v) = self.v_max {
            if v <= R::zero() {
                return Err(SolveError::InvalidConfig(format!("v_max must be > 0, got {v}")));
            }
        }
        if self.v_max_fraction <= R::zero() {
            return Err(SolveError::InvalidConfig("v_max_fraction must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_fraction) {
            return Err(SolveError::InvalidConfig(format!(
                "mutation_fraction must be within [0, 1], got {}",
                self.mutation_fraction
            )));
        }
        if self.c1 < R::zero() || self.c2 < R::zero() {
            return Err(SolveError::InvalidConfig("acceleration coefficients must be >= 0".into()));
        }
        if self.c1 + self.c2 >= R::of(4.0) {
            log::warn!(
                "c1 + c2 = {} is outside the convergence guidance c1 + c2 < 4",
                self.c1 + self.c2
            );
        }
        self.simplex
            .validate()
            .map_err(SolveError::InvalidConfig)?;
        Ok(())
    }
}

/// Linear inertia schedule with exact endpoints.
pub fn inertia_at<R: Real>(t: usize, config: &PsoConfig<R>) -> Result<R, SolveError<R>> {
    if t > config.t_max {
        return Err(SolveError::IterationOutOfRange { t, t_max: config.t_max });
    }
    if t == 0 {
        return Ok(config.omega_max);
    }
    if t == config.t_max {
        return Ok(config.omega_min);
    }
    let fraction = R::of(t as f64) / R::of(config.t_max as f64);
    Ok(config.omega_max - (config.omega_max - config.omega_min) * fraction)
}

#[derive(Clone, Debug)]
pub struct Particle<R> {
    pub position: Vec<R>,
    pub velocity: Vec<R>,
    /// Raw (unclamped) personal best per player slice.
    pub pbest_position: Vec<R>,
    /// Personal best cost per player.
    pub pbest_costs: Vec<R>,
}

#[derive(Clone, Debug)]
pub struct Swarm<R> {
    pub particles: Vec<Particle<R>>,
    pub gbest_position: Vec<R>,
    pub gbest_costs: Vec<R>,
    /// Particle index currently holding each player's gbest slice.
    pub gbest_holders: Vec<usize>,
    pub iteration: usize,
    pub stagnation: usize,
    /// Effective per-dimension velocity clamp.
    pub v_max: Vec<R>,
}

impl<R: Real> Swarm<R> {
    pub fn init(space: &SearchSpace<R>, config: &PsoConfig<R>, rng: &mut ChaCha8Rng) -> Self {
        let players = space.num_players();
        let dim = space.total_dim();
        let v_max = space
            .bounds()
            .iter()
            .map(|b| match config.v_max {
                Some(v) => v,
                None => config.v_max_fraction * b.width(),
            })
            .collect();
        let particles: Vec<Particle<R>> = (0..config.swarm_size)
            .map(|_| {
                let position = space.sample_uniform(rng);
                Particle {
                    pbest_position: position.clone(),
                    position,
                    velocity: vec![R::zero(); dim],
                    pbest_costs: vec![R::infinity(); players],
                }
            })
            .collect();
        let gbest_position = particles[0].position.clone();
        Swarm {
            particles,
            gbest_position,
            gbest_costs: vec![R::infinity(); players],
            gbest_holders: vec![0; players],
            iteration: 0,
            stagnation: 0,
            v_max,
        }
    }
}

/// Velocity update over the active slice:
/// `v <- w(t) v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`, then clamped.
pub fn update_velocity<R: Real>(
    particle: &mut Particle<R>,
    gbest: &[R],
    t: usize,
    active: Range<usize>,
    config: &PsoConfig<R>,
    v_max: &[R],
    rng: &mut impl Rng,
) -> Result<(), SolveError<R>> {
    let omega = inertia_at(t, config)?;
    let mut r1 = R::of(rng.random::<f64>());
    let mut r2 = R::of(rng.random::<f64>());
    for d in active {
        if config.per_dimension_draws {
            r1 = R::of(rng.random::<f64>());
            r2 = R::of(rng.random::<f64>());
        }
        let x = particle.position[d];
        let v = omega * particle.velocity[d]
            + config.c1 * r1 * (particle.pbest_position[d] - x)
            + config.c2 * r2 * (gbest[d] - x);
        particle.velocity[d] = v.max(-v_max[d]).min(v_max[d]);
    }
    Ok(())
}

/// Position update `x <- x + v` over the active slice. Out-of-bound positions
/// are left raw; clamping happens at evaluation time.
pub fn update_position<R: Real>(particle: &mut Particle<R>, active: Range<usize>) {
    for d in active {
        particle.position[d] = particle.position[d] + particle.velocity[d];
    }
}

/// Simplex refinement of one player's slice against frozen opponents. Falls
/// back to the unrefined slice if the local search cannot start.
pub fn hybrid_refine<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    player: usize,
    start_slice: &[R],
    context: &[R],
    hybrid_iter: usize,
    simplex: &SimplexConfig<R>,
) -> Vec<R> {
    if hybrid_iter == 0 {
        return start_slice.to_vec();
    }
    let range = space.player_slice(player);
    let objective = |slice: &[R]| -> R {
        let mut joint = context.to_vec();
        joint[range.clone()].copy_from_slice(slice);
        let profile = space.profile_from(&space.clamped(&joint));
        match game.evaluate_cost(&profile, player) {
            Ok(c) => c,
            Err(_) => R::infinity(),
        }
    };
    let cfg = simplex.clone().with_max_iterations(hybrid_iter);
    match simplex_minimize(&objective, start_slice, &cfg) {
        Ok(outcome) => outcome.point,
        Err(err) => {
            log::warn!("hybrid refinement for player {player} fell back to the raw position: {err}");
            start_slice.to_vec()
        }
    }
}

/// Re-seed a subset of particles once the swarm has stagnated: positions are
/// resampled uniformly within bounds, velocities zeroed, and the counter
/// reset. Particles holding a gbest slice are never touched.
pub fn stagnation_mutate<R: Real>(
    swarm: &mut Swarm<R>,
    space: &SearchSpace<R>,
    config: &PsoConfig<R>,
    rng: &mut impl Rng,
) {
    if config.stagnation_window == 0 || swarm.stagnation < config.stagnation_window {
        return;
    }
    swarm.stagnation = 0;
    let count = (config.mutation_fraction * config.swarm_size as f64).ceil() as usize;
    if count == 0 {
        return;
    }
    let mut candidates: Vec<usize> = (0..swarm.particles.len())
        .filter(|p| !swarm.gbest_holders.contains(p))
        .collect();
    let chosen = count.min(candidates.len());
    for k in 0..chosen {
        let j = rng.random_range(k..candidates.len());
        candidates.swap(k, j);
        let idx = candidates[k];
        swarm.particles[idx].position = space.sample_uniform(rng);
        for v in swarm.particles[idx].velocity.iter_mut() {
            *v = R::zero();
        }
    }
}

fn eval_slice<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    context: &[R],
    slice_vals: &[R],
    player: usize,
) -> Result<R, GameError> {
    let range = space.player_slice(player);
    let mut joint = context.to_vec();
    joint[range].copy_from_slice(slice_vals);
    let profile = space.profile_from(&space.clamped(&joint));
    game.evaluate_cost(&profile, player)
}

/// Run the co-evolutionary (hybrid) PSO to completion.
pub fn run_pso<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    config: &PsoConfig<R>,
) -> Result<SolveResult<R>, SolveError<R>> {
    config.validate()?;
    if space.num_players() != game.num_players() {
        return Err(SolveError::InvalidConfig(
            "search space does not match the game's player count".into(),
        ));
    }
    if space.total_dim() == 0 {
        return Err(SolveError::InvalidConfig("search space has no decision variables".into()));
    }

    let players = game.num_players();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut swarm = Swarm::init(space, config, &mut rng);
    let mut trace: Vec<TraceRow<R>> = Vec::new();
    let mut history: Vec<Vec<R>> = Vec::new();
    let mut iterations = 0;

    macro_rules! abort {
        ($err:expr, $iter:expr, $player:expr) => {
            SolveError::Aborted { source: $err, iteration: $iter, player: $player, trace }
        };
    }

    for t in 0..config.t_max {
        let iteration = t + 1;
        let mut improved_any = false;
        let mut mean_costs = vec![R::zero(); players];

        for player in 0..players {
            let range = space.player_slice(player);

            // The objective moved with the opponents: re-anchor gbest and
            // pbest costs before comparing new candidates against them.
            let context = swarm.gbest_position.clone();
            swarm.gbest_costs[player] =
                match eval_slice(game, space, &context, &context[range.clone()], player) {
                    Ok(c) => c,
                    Err(e) => return Err(abort!(e, iteration, player)),
                };
            let pbest_res: Result<Vec<R>, GameError> = if config.parallel_eval {
                swarm
                    .particles
                    .par_iter()
                    .map(|p| {
                        eval_slice(game, space, &context, &p.pbest_position[range.clone()], player)
                    })
                    .collect()
            } else {
                swarm
                    .particles
                    .iter()
                    .map(|p| {
                        eval_slice(game, space, &context, &p.pbest_position[range.clone()], player)
                    })
                    .collect()
            };
            let pbest_costs = match pbest_res {
                Ok(c) => c,
                Err(e) => return Err(abort!(e, iteration, player)),
            };
            for (particle, cost) in swarm.particles.iter_mut().zip(pbest_costs) {
                particle.pbest_costs[player] = cost;
            }

            for p in 0..swarm.particles.len() {
                update_velocity(
                    &mut swarm.particles[p],
                    &context,
                    t,
                    range.clone(),
                    config,
                    &swarm.v_max.clone(),
                    &mut rng,
                )?;
                update_position(&mut swarm.particles[p], range.clone());
            }

            if config.hybrid_iter > 0 && !config.refine_best_only {
                let refined: Vec<Vec<R>> = if config.parallel_eval {
                    swarm
                        .particles
                        .par_iter()
                        .map(|p| {
                            hybrid_refine(
                                game,
                                space,
                                player,
                                &p.position[range.clone()],
                                &context,
                                config.hybrid_iter,
                                &config.simplex,
                            )
                        })
                        .collect()
                } else {
                    swarm
                        .particles
                        .iter()
                        .map(|p| {
                            hybrid_refine(
                                game,
                                space,
                                player,
                                &p.position[range.clone()],
                                &context,
                                config.hybrid_iter,
                                &config.simplex,
                            )
                        })
                        .collect()
                };
                for (particle, slice) in swarm.particles.iter_mut().zip(refined) {
                    particle.position[range.clone()].copy_from_slice(&slice);
                }
            }

            let cost_res: Result<Vec<R>, GameError> = if config.parallel_eval {
                swarm
                    .particles
                    .par_iter()
                    .map(|p| eval_slice(game, space, &context, &p.position[range.clone()], player))
                    .collect()
            } else {
                swarm
                    .particles
                    .iter()
                    .map(|p| eval_slice(game, space, &context, &p.position[range.clone()], player))
                    .collect()
            };
            let mut costs = match cost_res {
                Ok(c) => c,
                Err(e) => return Err(abort!(e, iteration, player)),
            };

            if config.hybrid_iter > 0 && config.refine_best_only {
                let mut best = 0;
                for (i, &c) in costs.iter().enumerate() {
                    if c < costs[best] {
                        best = i;
                    }
                }
                let slice = hybrid_refine(
                    game,
                    space,
                    player,
                    &swarm.particles[best].position[range.clone()],
                    &context,
                    config.hybrid_iter,
                    &config.simplex,
                );
                swarm.particles[best].position[range.clone()].copy_from_slice(&slice);
                costs[best] =
                    match eval_slice(game, space, &context, &slice, player) {
                        Ok(c) => c,
                        Err(e) => return Err(abort!(e, iteration, player)),
                    };
            }

            mean_costs[player] = costs.iter().fold(R::zero(), |a, &c| a + c)
                / R::of(costs.len() as f64);

            for (p, cost) in costs.iter().enumerate() {
                let particle = &mut swarm.particles[p];
                if *cost < particle.pbest_costs[player] {
                    particle.pbest_costs[player] = *cost;
                    let slice = particle.position[range.clone()].to_vec();
                    particle.pbest_position[range.clone()].copy_from_slice(&slice);
                }
                if *cost < swarm.gbest_costs[player] {
                    swarm.gbest_costs[player] = *cost;
                    let slice = swarm.particles[p].position[range.clone()].to_vec();
                    swarm.gbest_position[range.clone()].copy_from_slice(&slice);
                    swarm.gbest_holders[player] = p;
                    improved_any = true;
                }
            }
        }

        swarm.iteration = iteration;
        iterations = iteration;
        if improved_any {
            swarm.stagnation = 0;
        } else {
            swarm.stagnation += 1;
        }

        let profile = space.profile_from(&space.clamped(&swarm.gbest_position));
        let best_costs = match game.evaluate_all_costs(&profile) {
            Ok(c) => c,
            Err(e) => return Err(abort!(e, iteration, 0)),
        };
        for player in 0..players {
            trace.push(TraceRow {
                iteration,
                player,
                best_cost: best_costs[player],
                mean_cost: mean_costs[player],
                stagnation: swarm.stagnation,
            });
        }
        history.push(best_costs);

        stagnation_mutate(&mut swarm, space, config, &mut rng);

        if stalled(&history, config.stall_window, config.stall_tolerance) {
            break;
        }
    }

    let profile = space.profile_from(&space.clamped(&swarm.gbest_position));
    let costs = game.evaluate_all_costs(&profile)?;
    Ok(SolveResult { profile, costs, trace, seed: config.rng_seed, iterations })
}
