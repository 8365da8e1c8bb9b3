//! Extensions of characters on operator subalgebras to states and
//! conditional expectations, in finite dimension.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod extension;
pub mod feasibility;
pub mod numerics;
pub mod random;
pub mod verify;
pub mod wedderburn;

pub use error::{Error, Result};
