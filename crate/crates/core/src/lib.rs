//! Classical simulation of the measurement statistics of Shor's
//! order-finding algorithm.
//!
//! The crate computes the exact output distribution of the measured
//! register, samples from it, recovers the order by continued fractions,
//! extracts factors, and reproduces the success and failure rates of the
//! whole procedure by exhaustive sweeps and Monte Carlo.

pub mod cli;
pub mod distribution;
pub mod error;
pub mod experiments;
pub mod number_theory;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
pub use number_theory::{Fraction, Natural};
