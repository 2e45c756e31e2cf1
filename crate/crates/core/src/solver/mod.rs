//! Mild-solution integrator, Picard fixed-point oracle and run classification.

mod classify;
mod integrate;
mod params;
mod weights;

pub use classify::{
    blowup_trigger, classify, estimate_decay_exponent, Classification, DecayFit, HistoryPoint, Thresholds,
};
pub use integrate::{integrate, linear_parts, picard_solve, PicardOptions, PicardResult, SimResult, SolverOptions};
pub use params::{ModelParams, TimeMesh};
pub use weights::{duhamel_weights, DuhamelWeights};
