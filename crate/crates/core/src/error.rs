use thiserror::Error;

/// Rejected configuration values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid machine parameter: {0}")]
    Machine(String),
    #[error("invalid controller parameter: {0}")]
    Controller(String),
    #[error("invalid simulation parameter: {0}")]
    Simulation(String),
}

/// Failures raised while a simulation is running.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("non-finite state at t = {t:.9} s (last finite state at t = {last_good:.9} s)")]
    NonFinite { t: f64, last_good: f64 },
    #[error("modulator received an infeasible reference: T0 = {t0:e} s")]
    InfeasibleReference { t0: f64 },
}

/// Failures of the post-processing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("signal has no fundamental component")]
    NoFundamental,
    #[error("window must span an integer number (>= {min}) of fundamental periods, got {periods}")]
    BadWindow { periods: usize, min: usize },
    #[error("fundamental period is not an integer number of samples ({samples:.6})")]
    NonIntegerPeriod { samples: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}
