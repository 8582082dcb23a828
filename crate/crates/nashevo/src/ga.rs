//! Co-evolutionary genetic algorithm over decimal chromosomes.
//!
//! Each player keeps its own subpopulation of full-length chromosomes. In a
//! generation the players are processed in ascending order: the other players'
//! digit segments are overwritten with their broadcast bests, the player's
//! segment evolves by roulette selection, one-point crossover, and per-digit
//! mutation, and the player's new best is broadcast before the next player
//! starts.
//!
//! With elitism the incumbent best chromosome survives every generation, so a
//! player's best cost is non-increasing whenever its objective is stationary
//! (a single player, or opponents that have stopped moving). Across an active
//! co-evolutionary sweep the opponents' broadcasts shift each player's
//! objective, and the traced best cost follows the moving target honestly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use std::ops::Range;

use crate::encoding::{decode, random_chromosome, Chromosome, EncodingScheme};
use crate::game::{DynamicGame, GameError, StrategyProfile};
use crate::real::Real;
use crate::result::{stalled, SolveError, SolveResult, TraceRow};
use crate::space::SearchSpace;

/// Offset C used to turn minimized costs into positive fitness F = C - J.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitnessOffset<R> {
    /// Per-evaluation C = max J + 10% of |max J| + 1, guaranteeing F > 0.
    Adaptive,
    Fixed(R),
}

#[derive(Clone, Debug)]
pub struct GaConfig<R> {
    pub population_size: usize,
    pub crossover_prob: f64,
    /// Per-digit mutation probability; useful range is roughly 0.01 to 0.2.
    pub mutation_prob: f64,
    pub elitism: bool,
    pub fitness_offset: FitnessOffset<R>,
    pub max_generations: usize,
    /// Stall window M: stop when every player's best cost moved less than
    /// `stall_tolerance` over the last M generations.
    pub stall_window: usize,
    pub stall_tolerance: R,
    /// Evaluate subpopulations on the rayon pool; random draws stay on the
    /// single-writer path, so results are identical either way.
    pub parallel_eval: bool,
    pub rng_seed: u64,
}

impl<R: Real> Default for GaConfig<R> {
    fn default() -> Self {
        Self {
            population_size: 40,
            crossover_prob: 0.9,
            mutation_prob: 0.05,
            elitism: true,
            fitness_offset: FitnessOffset::Adaptive,
            max_generations: 2000,
            stall_window: 400,
            stall_tolerance: R::of(1e-10),
            parallel_eval: false,
            rng_seed: 0,
        }
    }
}

impl<R: Real> GaConfig<R> {
    pub fn validate(&self) -> Result<(), SolveError<R>> {
        if self.population_size < 2 {
            return Err(SolveError::InvalidConfig(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(SolveError::InvalidConfig(format!(
                "crossover_prob must be within [0, 1], got {}",
                self.crossover_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(SolveError::InvalidConfig(format!(
                "mutation_prob must be within [0, 1], got {}",
                self.mutation_prob
            )));
        }
        if self.max_generations == 0 {
            return Err(SolveError::InvalidConfig("max_generations must be at least 1".into()));
        }
        if self.stall_tolerance < R::zero() {
            return Err(SolveError::InvalidConfig("stall_tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// F = C - J. The caller keeps F positive through the offset choice;
/// negativity is caught by `roulette_select`.
pub fn fitness_transform<R: Real>(cost: R, offset: R) -> R {
    offset - cost
}

/// Fitness-proportional selection. All fitnesses must be nonnegative with a
/// positive total.
pub fn roulette_select<R: Real>(
    fitnesses: &[R],
    rng: &mut impl Rng,
) -> Result<usize, SolveError<R>> {
    let mut total = R::zero();
    for (i, &f) in fitnesses.iter().enumerate() {
        if f < R::zero() || !f.is_finite() {
            return Err(SolveError::Selection {
                detail: format!("fitness {f} at index {i}"),
            });
        }
        total = total + f;
    }
    if total <= R::zero() {
        return Err(SolveError::Selection { detail: "all fitnesses are zero".into() });
    }
    let target = R::of(rng.random::<f64>()) * total;
    let mut acc = R::zero();
    let mut last_positive = 0;
    for (i, &f) in fitnesses.iter().enumerate() {
        if f > R::zero() {
            last_positive = i;
        }
        acc = acc + f;
        if target < acc {
            return Ok(i);
        }
    }
    Ok(last_positive)
}

/// One-point crossover with the cut drawn uniformly over the interior of the
/// active player's digit segment; offspring exchange whole suffixes. Segments
/// shorter than two digits admit no cut and yield clones.
pub fn one_point_crossover<R: Real>(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    segment: Range<usize>,
    rng: &mut impl Rng,
) -> Result<(Chromosome, Chromosome), SolveError<R>> {
    if parent_a.len() != parent_b.len() {
        return Err(SolveError::CrossoverLength { a: parent_a.len(), b: parent_b.len() });
    }
    if segment.len() < 2 {
        return Ok((parent_a.clone(), parent_b.clone()));
    }
    let cut = rng.random_range(segment.start + 1..segment.end);
    let mut child_a = parent_a.clone();
    let mut child_b = parent_b.clone();
    child_a.digits_mut()[cut..].copy_from_slice(&parent_b.digits()[cut..]);
    child_b.digits_mut()[cut..].copy_from_slice(&parent_a.digits()[cut..]);
    Ok((child_a, child_b))
}

/// Resample each digit of `active` uniformly over 0..=9 with probability
/// `mutation_prob`; digits outside the range are untouched.
pub fn mutate(
    chromosome: &Chromosome,
    active: Range<usize>,
    mutation_prob: f64,
    rng: &mut impl Rng,
) -> Chromosome {
    let mut out = chromosome.clone();
    for idx in active {
        if rng.random::<f64>() < mutation_prob {
            out.digits_mut()[idx] = rng.random_range(0..10u8) as u8;
        }
    }
    out
}

/// Mutable solver state across generations.
pub struct GaState<R> {
    pub subpopulations: Vec<Vec<Chromosome>>,
    /// Broadcast best digit segment per player.
    best_segments: Vec<Vec<u8>>,
    pub generation: usize,
    /// Per-generation per-player best costs at the joint best profile.
    pub history: Vec<Vec<R>>,
    stagnation_ages: Vec<usize>,
}

impl<R: Real> GaState<R> {
    pub fn init(
        space: &SearchSpace<R>,
        scheme: &EncodingScheme,
        config: &GaConfig<R>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, SolveError<R>> {
        let players = space.num_players();
        let mut subpopulations = Vec::with_capacity(players);
        for _ in 0..players {
            let mut pop = Vec::with_capacity(config.population_size);
            for _ in 0..config.population_size {
                pop.push(random_chromosome(scheme, space.bounds(), rng)?);
            }
            subpopulations.push(pop);
        }
        let best_segments = (0..players)
            .map(|i| subpopulations[i][0].digits()[scheme.digit_slice(i)].to_vec())
            .collect();
        Ok(Self {
            subpopulations,
            best_segments,
            generation: 0,
            history: Vec::new(),
            stagnation_ages: vec![0; players],
        })
    }

    /// Full-length digit context assembled from the broadcast bests.
    fn context_digits(&self, scheme: &EncodingScheme) -> Vec<u8> {
        let mut ctx = vec![0u8; scheme.chromosome_len()];
        for (i, segment) in self.best_segments.iter().enumerate() {
            ctx[scheme.digit_slice(i)].copy_from_slice(segment);
        }
        ctx
    }

    /// Decoded, clamped joint best profile.
    pub fn best_profile(&self, space: &SearchSpace<R>, scheme: &EncodingScheme) -> StrategyProfile<R> {
        let ctx = self.context_digits(scheme);
        let chrom = Chromosome::from_digits(ctx, scheme).expect("context digits are valid");
        let decoded: Vec<R> = decode(&chrom, scheme);
        space.profile_from(&space.clamped(&decoded))
    }

    /// Decoded best strategy values for one player.
    pub fn best_values(&self, space: &SearchSpace<R>, scheme: &EncodingScheme, player: usize) -> Vec<R> {
        let ctx = self.context_digits(scheme);
        let chrom = Chromosome::from_digits(ctx, scheme).expect("context digits are valid");
        let decoded: Vec<R> = decode(&chrom, scheme);
        space.clamped(&decoded)[space.player_slice(player)].to_vec()
    }
}

/// Per-generation observables used for traces.
pub struct GenerationReport<R> {
    pub best_costs: Vec<R>,
    pub mean_costs: Vec<R>,
    pub stagnation_ages: Vec<usize>,
}

fn evaluate_candidates<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    scheme: &EncodingScheme,
    subpop: &[Chromosome],
    player: usize,
    parallel: bool,
) -> Result<Vec<R>, GameError> {
    let eval = |c: &Chromosome| -> Result<R, GameError> {
        let decoded: Vec<R> = decode(c, scheme);
        let profile = space.profile_from(&space.clamped(&decoded));
        game.evaluate_cost(&profile, player)
    };
    if parallel {
        subpop.par_iter().map(eval).collect()
    } else {
        subpop.iter().map(eval).collect()
    }
}

/// One full sweep over all players.
pub fn coevolve_generation<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    scheme: &EncodingScheme,
    state: &mut GaState<R>,
    config: &GaConfig<R>,
    rng: &mut ChaCha8Rng,
) -> Result<GenerationReport<R>, SolveError<R>> {
    let players = space.num_players();
    let iteration = state.generation + 1;
    let mut mean_costs = vec![R::zero(); players];

    for player in 0..players {
        let segment = scheme.digit_slice(player);
        let ctx = state.context_digits(scheme);
        for chrom in state.subpopulations[player].iter_mut() {
            chrom.copy_range_from(0..segment.start, &ctx);
            chrom.copy_range_from(segment.end..scheme.chromosome_len(), &ctx);
        }

        let costs = evaluate_candidates(
            game,
            space,
            scheme,
            &state.subpopulations[player],
            player,
            config.parallel_eval,
        )
        .map_err(|source| SolveError::Aborted { source, iteration, player, trace: vec![] })?;

        let mut best_idx = 0;
        let mut max_cost = costs[0];
        for (i, &c) in costs.iter().enumerate() {
            if c < costs[best_idx] {
                best_idx = i;
            }
            max_cost = max_cost.max(c);
        }
        state.best_segments[player] =
            state.subpopulations[player][best_idx].digits()[segment.clone()].to_vec();
        mean_costs[player] = costs.iter().fold(R::zero(), |a, &c| a + c)
            / R::of(costs.len() as f64);

        let offset = match config.fitness_offset {
            FitnessOffset::Adaptive => max_cost + R::of(0.1) * max_cost.abs() + R::one(),
            FitnessOffset::Fixed(c) => c,
        };
        let fitnesses: Vec<R> = costs.iter().map(|&j| fitness_transform(j, offset)).collect();

        let mut next = Vec::with_capacity(config.population_size);
        if config.elitism {
            next.push(state.subpopulations[player][best_idx].clone());
        }
        while next.len() < config.population_size {
            let pa = roulette_select(&fitnesses, rng)?;
            let pb = roulette_select(&fitnesses, rng)?;
            let (child_a, child_b) = if rng.random::<f64>() < config.crossover_prob {
                one_point_crossover(
                    &state.subpopulations[player][pa],
                    &state.subpopulations[player][pb],
                    segment.clone(),
                    rng,
                )?
            } else {
                (
                    state.subpopulations[player][pa].clone(),
                    state.subpopulations[player][pb].clone(),
                )
            };
            next.push(mutate(&child_a, segment.clone(), config.mutation_prob, rng));
            if next.len() < config.population_size {
                next.push(mutate(&child_b, segment.clone(), config.mutation_prob, rng));
            }
        }
        state.subpopulations[player] = next;
    }

    state.generation = iteration;
    let profile = state.best_profile(space, scheme);
    let best_costs = game
        .evaluate_all_costs(&profile)
        .map_err(|source| SolveError::Aborted { source, iteration, player: 0, trace: vec![] })?;
    for i in 0..players {
        let unchanged = state
            .history
            .last()
            .map(|prev| (best_costs[i] - prev[i]).abs() <= config.stall_tolerance)
            .unwrap_or(false);
        state.stagnation_ages[i] = if unchanged { state.stagnation_ages[i] + 1 } else { 0 };
    }
    state.history.push(best_costs.clone());

    Ok(GenerationReport {
        best_costs,
        mean_costs,
        stagnation_ages: state.stagnation_ages.clone(),
    })
}

/// Run the co-evolutionary GA to completion.
pub fn run_ga<R: Real>(
    game: &DynamicGame<R>,
    space: &SearchSpace<R>,
    scheme: &EncodingScheme,
    config: &GaConfig<R>,
) -> Result<SolveResult<R>, SolveError<R>> {
    config.validate()?;
    if space.num_players() != game.num_players() {
        return Err(SolveError::InvalidConfig(
            "search space does not match the game's player count".into(),
        ));
    }
    if scheme.variable_count() != space.total_dim()
        || scheme.player_slices() != space.player_slices()
    {
        return Err(SolveError::InvalidConfig(
            "encoding scheme does not cover the search space layout".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut state = GaState::init(space, scheme, config, &mut rng)?;
    let mut trace: Vec<TraceRow<R>> = Vec::new();
    let mut iterations = 0;

    for generation in 1..=config.max_generations {
        let report = match coevolve_generation(game, space, scheme, &mut state, config, &mut rng) {
            Ok(report) => report,
            Err(SolveError::Aborted { source, iteration, player, .. }) => {
                return Err(SolveError::Aborted { source, iteration, player, trace });
            }
            Err(other) => return Err(other),
        };
        iterations = generation;
        for player in 0..game.num_players() {
            trace.push(TraceRow {
                iteration: generation,
                player,
                best_cost: report.best_costs[player],
                mean_cost: report.mean_costs[player],
                stagnation: report.stagnation_ages[player],
            });
        }
        if stalled(&state.history, config.stall_window, config.stall_tolerance) {
            break;
        }
    }

    let profile = state.best_profile(space, scheme);
    let costs = game.evaluate_all_costs(&profile)?;
    Ok(SolveResult { profile, costs, trace, seed: config.rng_seed, iterations })
}
