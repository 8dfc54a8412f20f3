use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("not a state: minimum eigenvalue {min_eigenvalue:.3e} is below -1e-10")]
    NotAState { min_eigenvalue: f64 },

    #[error("invalid moments: radicand 6*m2 - 2*m1^2 = {radicand:.3e}")]
    InvalidMoments { radicand: f64 },

    #[error("unknown spatial mode {mode} (state has {n_modes} modes)")]
    UnknownMode { mode: usize, n_modes: usize },

    #[error("insufficient statistics for {moment}: no successful iterations out of {n_total}")]
    InsufficientStatistics { moment: &'static str, n_total: u64 },

    #[error("sampling exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
