use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("state belongs to mesh generation {state} but the mesh is at generation {mesh}")]
    GenerationMismatch { state: u64, mesh: u64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("nonlinear solve did not converge after {iterations} iterations (KKT error {error:.3e})")]
    NotConverged { iterations: usize, error: f64 },
    #[error("simulation failed at t = {t}: {reason}")]
    Simulation { t: f64, reason: String },
    #[error("run ended before the tip reached the evaluation window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("missing scenario w = {0}")]
    MissingScenario(f64),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
