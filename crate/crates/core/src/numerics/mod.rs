//! Dense complex linear algebra kernel.
//!
//! Everything here is a pure function of its inputs. Rank decisions use
//! singular values (or vector norms) relative to the largest one.

mod decomp;
mod matrix;
mod subspace;

#[allow(unused_imports)]
pub use decomp::eigh;
pub use decomp::{
    hermitian_eig, null_space, polar_decompose, psd_project, pseudo_inverse, svd, HermitianEig,
    Polar, Svd,
};
pub use matrix::{ComplexMatrix, C64, ONE, ZERO};
pub use subspace::{
    least_norm_solve, orthonormalize, orthonormalize_against_scale, project_onto_span,
    subspace_rank, Frobenius, Pairing,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Singular-value cutoff, relative to the largest singular value.
    pub rank_tol: f64,
    /// Bound on verification residuals.
    pub residual_tol: f64,
    /// Eigenvalue floor for positive semidefiniteness.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            psd_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
            ("psd_tol", self.psd_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}
