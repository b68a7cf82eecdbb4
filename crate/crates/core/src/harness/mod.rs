//! Configuration, parallel ensemble runs, experiments and file output.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod io;
pub mod runner;

pub use cli::{cli_run, exit_code, Cli, Command};
pub use config::{parse_angle, RunConfig};
pub use experiments::{
    run_benchmark, run_bounds, run_decay, run_g2, run_nonmarkov, run_ordering, run_sweep, run_until_peak,
    population_rate, BenchmarkResult, FitRow, NonMarkovResult, OrderingResult, PeakRow, SweepResult,
};
pub use io::{read_series_csv, ExperimentManifest};
pub use runner::{realization_for, realization_stream, run_ensemble, run_ensemble_with, RunOptions};
