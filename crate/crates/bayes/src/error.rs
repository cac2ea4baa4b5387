use thiserror::Error;

#[derive(Debug, Error)]
pub enum BayesError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("found only {found} of {required} feasible samples in {tried} draws (feasible fraction ≈ {fraction:.2e})")]
    InsufficientFeasible { required: usize, found: usize, tried: usize, fraction: f64 },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, BayesError>;
