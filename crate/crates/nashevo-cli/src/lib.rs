//! Library side of the command-line front end: configuration loading,
//! experiment execution, verification, and the population-sweep bench.

pub mod bench;
pub mod config;
pub mod error;
pub mod experiment;
pub mod profile_io;
pub mod report;
pub mod setup;

pub use bench::run_bench;
pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{config_from_result_file, emit_trace, run_experiment};
pub use profile_io::{read_profile, write_profile};
pub use setup::build_game;
