//! Stability laboratory for echo state networks: reservoir construction,
//! the empirical echo state property index, literature stability conditions,
//! ridge readouts and reproducible hyperparameter sweeps.

pub mod conditions;
pub mod data;
pub mod error;
pub mod esp;
pub mod linalg;
pub mod plot;
pub mod readout;
pub mod reservoir;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
