//! Quantum stochastic flows, Feynman–Kac perturbations and their semigroups
//! on a discretised Boson Fock space.

pub mod classical;
pub mod error;
pub mod flow;
pub mod fock;
pub mod ito;
pub mod linalg;
pub mod multiplier;
pub mod random;
pub mod semigroup;
pub mod structure;

pub use error::{QfkError, Result};
