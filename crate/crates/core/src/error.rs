use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("parent operator reconstruction failed (relative residual {0:.3e})")]
    Reconstruction(f64),
    #[error("non-finite value at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
