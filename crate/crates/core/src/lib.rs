//! Combinatorics, propagator quadrature and kinetic Monte Carlo for the
//! weak-coupling diffusion limit of a random Schrödinger evolution.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod kinetic;
pub mod partitions;
pub mod perm;
pub mod profile;
pub mod quad;
pub mod self_energy;

pub use error::{Error, Result};
