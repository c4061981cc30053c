use thiserror::Error;

use crate::ensembles::GroupKind;
use crate::qcore::Pauli;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("CHSH measurement label must be X, Y or Z, got {0}")]
    InvalidChshLabel(Pauli),
    #[error("inconsistent resource values: {0}")]
    Inconsistent(String),
    #[error("{what} closure produced {found} elements, expected {expected}")]
    EnumerationSize {
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("index {index} out of range for a group of {len} elements")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("exact enumeration is not available for group {0}")]
    NotEnumerable(GroupKind),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bad cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
