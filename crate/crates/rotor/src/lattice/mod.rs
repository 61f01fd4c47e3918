//! Coordinates, directions, cyclic rotor orders, initial configurations,
//! and sparse mutable lattice state.

pub mod order;
pub mod rule;
pub mod state;

pub use order::{validate_order, CyclicOrder, Direction, OrderError};
pub use rule::{DefaultRule, InitialRule};
pub use state::{LatticeError, LatticeState, Sign, Site, SiteState};
