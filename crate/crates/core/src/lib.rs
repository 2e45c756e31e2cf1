pub mod criticality;
pub mod error;
pub mod fractional;
pub mod harness;
pub mod kernels;
pub mod quadrature;
pub mod solver;
pub mod spectral;
pub mod special;

pub use error::{FracError, Result};
pub use harness::cli_main;
