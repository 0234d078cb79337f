//! Quantum phase transitions in Curie–Weiss models.
//!
//! SU(2)-form Hamiltonians of the Lipkin, pairing, Jaynes–Cummings, bilayer
//! and two-spin Heisenberg models are diagonalized in their conserved sectors
//! to locate ground-state and excited-state transitions. The classical limits
//! `H(p, q; λ)` are analyzed in phase space for comparison.

pub mod cli;
pub mod correspondence;
pub mod error;
pub mod models;
pub mod phase;
pub mod spectra;
pub mod su2;

pub use error::{Error, Result};
