use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("branch cut: {0}")]
    BranchCut(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("simulation: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
