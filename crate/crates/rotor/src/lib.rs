//! Deterministic rotor walks on `Z^d`: a sparse simulation engine for
//! escape-rate experiments, rotor-router aggregation, discrete potential
//! theory baselines, and a finite-graph abelian-network testbed.

pub mod lattice;
pub mod abelian;
pub mod experiments;
pub mod potential;
pub mod walk;

pub use lattice::{CyclicOrder, Direction, InitialRule, LatticeState, Sign, Site};
