use thiserror::Error;

use crate::field::Representation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected {expected:?} representation, found {found:?}")]
    Representation {
        expected: Representation,
        found: Representation,
    },
    #[error("data length {found} does not match grid size {expected}")]
    Length { expected: usize, found: usize },
    #[error("spectral data is not Hermitian (asymmetry {asymmetry:.3e} relative)")]
    NotHermitian { asymmetry: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
