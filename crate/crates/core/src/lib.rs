//! Spacetime circuit-to-Hamiltonian constructions: grid geometry, the
//! particle Fock-space Hamiltonian, its effective spin chains, adiabatic and
//! free-evolution computation schemes, and the Young-lattice walk.

pub mod adiabatic;
pub mod chains;
pub mod error;
pub mod fock;
pub mod geometry;
pub mod janzing;
pub mod numerics;
pub mod young;

pub use error::{Error, Result};
