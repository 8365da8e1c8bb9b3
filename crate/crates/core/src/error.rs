use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a structural or algebraic invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix is not Hermitian (residual {residual:.3e}, allowed {allowed:.3e})")]
    NotHermitian { residual: f64, allowed: f64 },

    #[error("linear system is inconsistent (least-squares residual {residual:.3e})")]
    InfeasibleLinearSystem { residual: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("spectral collision persisted after {attempts} attempts")]
    SpectralCollision { attempts: usize },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn check_shape(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// True for errors caused by bad input rather than internal failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::DimensionMismatch { .. }
                | Error::NotHermitian { .. }
                | Error::InfeasibleLinearSystem { .. }
                | Error::Structure(_)
                | Error::Size(_)
                | Error::Parse(_)
        )
    }
}
