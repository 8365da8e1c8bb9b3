//! Constructions of normal state extensions of characters and of
//! conditional expectations extending D-characters.
//!
//! Both scalar engines work in `B(ℂ^N)` with the unweighted trace and then
//! pinch the density to the block structure of `M`. Trace weights enter
//! only through the final conversion `ρ = W⁻¹·pinch(ρ₀)`.

mod dchar;
mod scalar;

pub use dchar::{
    apply_expectation, corner_character, d_character_extend, CornerState, ExpectationRecipe,
};
pub use scalar::{scalar_extend_l2, scalar_extend_reflexive, ConstructionTrace, NormalState};
