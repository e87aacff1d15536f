//! Configuration, ensembles, route comparison and the command line.

pub mod cli;
pub mod compare;
pub mod config;
pub mod ensemble;
pub mod persist;

pub use config::{parse_override, InitialState, RunConfig, SchemeKind};
pub use ensemble::{
    default_output_dir, run_ensemble, run_trajectory, trajectory_seed, ColumnStats, EnsembleOptions, EnsembleRun,
    EnsembleSummary, TrajectoryFailure, TrajectoryManifest, OUTPUT_DIR_ENV,
};
