//! Weighted ℓ¹ recovery of sparse sources in linear inverse problems whose
//! forward operator has a non-trivial null space.

pub mod error;
pub mod fem;
pub mod harness;
pub mod operators;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
