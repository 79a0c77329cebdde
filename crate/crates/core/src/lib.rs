//! Exact computations in the supertropical semifield of fractions and its
//! lattice of principal kernels.

pub mod error;
pub mod expr;
pub mod ho;
pub mod kernel;
pub mod lp;
pub mod matroid;
pub mod pl;
pub mod poly;
mod qfast;
pub mod random;
pub mod rat;
pub mod rational;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
pub use rat::Rat;
pub use rational::RationalFunction;
pub use scalar::{Layer, Scalar};
