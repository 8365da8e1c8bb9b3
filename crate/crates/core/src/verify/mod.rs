//! Independent property checks. Every check returns a
//! [`VerificationReport`] of named residuals instead of failing.
//!
//! Complete positivity is decided through the Choi matrix. Plain positivity
//! is only sampled.

mod checks;
mod report;

pub use checks::{
    choi_of_fn, choi_of_map, extends_d_character, extends_functional, is_conditional_expectation,
    is_conditional_expectation_map, is_state, sampled_positivity, validate_d_character,
};
pub use report::{Check, CheckKind, VerificationReport};
