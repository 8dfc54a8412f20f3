//! Quantum-discord indicators for two-qubit states.
//!
//! The geometric discord `D` and its moment-based lower bound `Q` are
//! computed three ways: spectrally from the correlation matrix `K`, from
//! multi-copy expectation values of singlet-projection operators, and by
//! Monte Carlo simulation of a linear-optical coincidence experiment.

pub mod discord;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod multicopy;
pub mod optics;
pub mod rng;
pub mod robustness;
pub mod state;

pub use error::{Error, Result};
pub use state::{Side, TwoQubitState};
