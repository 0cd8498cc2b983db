//! Optimal strategies for discriminating two pure qubit states when a wrong
//! guess and a declined guess carry separate penalties.
//!
//! - [`qmath`]: real 2×2 symmetric algebra for plane qubits
//! - [`bounds`]: projective strategies, the modified Helstrom bound and its kink
//! - [`cascade`]: three-outcome cascaded measurements, ideal and noisy
//! - [`optimizer`]: Nelder-Mead minimization, sweeps and noise thresholds
//! - [`montecarlo`]: trial-level simulation used as an independent check
//! - [`cli`]: the `mhbound` command-line tool

pub mod bounds;
pub mod cascade;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod qmath;

pub use error::{Error, Result};
