//! Configuration files, parameter sweeps, p-bracketing and the command line.

mod cli;
mod config;
mod selftest;
mod sweep;

pub use cli::{cli_main, THREADS_ENV};
pub use config::{BaseParams, DataKind, DataSpec, GridConfig, SweepConfig, TimeConfig, SCHEMA_VERSION};
pub use selftest::{format_table, run_selftest, Check};
pub use sweep::{
    bracket_pstar, bracket_with, run_sweep, simulate, write_history_csv, write_sweep_csv, BracketReport, SweepRow,
    MASS_NOTE, SWEEP_COLUMNS,
};
