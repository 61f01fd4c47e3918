//! Discrete potential theory for simple random walk: exact solves of the
//! lattice Dirichlet problem, Green's functions and their asymptotics,
//! hitting probabilities, and Monte-Carlo escape-probability estimation.

pub mod calibration;
pub mod green;
pub mod harmonic;
pub mod mc;
pub mod region;
pub mod solver;

pub use calibration::{calibrate, d2_green_offset, fit_a_d, Calibration};
pub use green::{exact_green, exact_green_field, green_asymptotic, GreenEstimate, GreenForm};
pub use harmonic::{gradient_sum, hitting_field, HarmonicField};
pub use mc::{direction_chi_square, mc_alpha, McAlpha};
pub use region::Region;

use crate::lattice::Site;

#[derive(Debug, thiserror::Error)]
pub enum PotentialError {
    #[error("region has {actual} interior sites, above the exact-solve cap of {cap}")]
    RegionTooLarge { actual: usize, cap: usize },
    #[error("site {0:?} is outside the region")]
    OutOfRegion(Site),
    #[error("target site {0:?} is not on the region boundary")]
    NotBoundary(Site),
    #[error("interior component with no path to the boundary")]
    DisconnectedInterior,
    #[error("dimension {0} is not supported here (walk is recurrent below 3)")]
    RecurrentDimension(usize),
    #[error("radius {0} below the minimum of {1}")]
    RadiusTooSmall(f64, f64),
    #[error("no calibration value for {0} in d = {1}; run calibration first")]
    CalibrationMissing(&'static str, usize),
    #[error("solver failed to reach residual {target:e} (got {achieved:e})")]
    NoConvergence { target: f64, achieved: f64 },
    #[error("malformed calibration data: {0}")]
    BadCalibration(String),
}
