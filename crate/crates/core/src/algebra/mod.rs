//! Ambient block algebras, subalgebras given by spanning sets, and the
//! functionals and homomorphisms defined on them.
//!
//! Finite-dimensional subspaces are closed in every linear topology, so
//! weak* closedness and weak* continuity hold automatically here and are
//! never checked.

mod character;
mod space;
mod subalgebra;

pub use character::{functional_kernel, riesz_representative, DCharacter, ScalarCharacter};
pub use space::{embed_direct_sum, hs_inner, BlockSpace, TraceWeights};
pub use subalgebra::{generate_algebra, validate_subalgebra, Subalgebra};
