//! Evolutionary solvers for approximate global Nash equilibria of N-player,
//! K-stage discrete-time dynamic games.
//!
//! The crate provides:
//!
//! - a game model ([`game`]) with open-loop and linear-feedback strategy
//!   profiles, trajectory simulation, and per-player cost evaluation;
//! - a decimal chromosome encoding ([`encoding`]) and a co-evolutionary
//!   genetic algorithm ([`ga`]);
//! - a global-best particle swarm with optional simplex refinement and
//!   stagnation mutation ([`pso`]);
//! - a Nelder-Mead simplex minimizer ([`local_search`]);
//! - best-response certification and an exact open-loop oracle for
//!   linear-quadratic games ([`verify`]).
//!
//! Everything is generic over the scalar type through [`Real`] (`f32` or
//! `f64`); the aliases below pin the common `f64` instantiations.

pub mod encoding;
pub mod game;
pub mod ga;
pub mod linalg;
pub mod local_search;
pub mod pso;
pub mod real;
pub mod result;
pub mod space;
pub mod verify;

pub use encoding::{decode, encode, random_chromosome, Chromosome, EncodingScheme};
pub use game::lq::LqGameSpec;
pub use game::nonquadratic::NonQuadraticSpec;
pub use game::{DynamicGame, FeedbackLaw, GameError, PlayerStrategy, StrategyProfile, Trajectory};
pub use ga::{run_ga, FitnessOffset, GaConfig, GaState};
pub use local_search::{simplex_minimize, SimplexConfig, SimplexOutcome};
pub use pso::{run_pso, Particle, PsoConfig, Swarm};
pub use real::Real;
pub use result::{SolveError, SolveResult, TraceRow};
pub use space::{Interval, SearchSpace, StrategyMode};
pub use verify::{best_response_gap, certify_nash, lq_openloop_nash, BrBudget, NashReport};

/// `f64` instantiations used by the command-line front end.
pub type Game64 = DynamicGame<f64>;
pub type Profile64 = StrategyProfile<f64>;
pub type Space64 = SearchSpace<f64>;
pub type GaConfig64 = GaConfig<f64>;
pub type PsoConfig64 = PsoConfig<f64>;
pub type SolveResult64 = SolveResult<f64>;
pub type NashReport64 = NashReport<f64>;

/// `f32` instantiations.
pub type Game32 = DynamicGame<f32>;
pub type Profile32 = StrategyProfile<f32>;
pub type Space32 = SearchSpace<f32>;
