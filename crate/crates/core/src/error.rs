use thiserror::Error;

/// Errors produced anywhere in the identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is numerically singular (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diag:.3e})")]
    NotConverged { sweeps: usize, off_diag: f64 },

    #[error("simulation produced a non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("I + A_d is singular: the discrete model has an eigenvalue at -1")]
    SingularAtMinusOne,

    #[error("frequency grid point omega = {omega} is a pole of the model")]
    PoleOnGrid { omega: f64 },

    #[error("positive-feedback loop is ill-posed: I - D*Dbar is singular")]
    IllPosed,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("stacked data matrix [Theta; Omega] is rank deficient ({rank} of {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("ADMM did not converge in {iterations} iterations (primal {primal_res:.3e}, dual {dual_res:.3e})")]
    SolverNotConverged {
        iterations: usize,
        primal_res: f64,
        dual_res: f64,
    },

    #[error("recovered P is numerically singular (lambda_min = {min_eig:.3e})")]
    SingularP { min_eig: f64 },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
