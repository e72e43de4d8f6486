//! Numerical laboratory for the Hausdorff dimension of graphs of operator
//! semistable Lévy processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] validates matrix exponents, splits them into blocks by the
//!   real parts of their eigenvalues and evaluates the scaling operators `s^E`.
//! * [`dimension`] evaluates the closed-form graph and range dimensions.
//! * [`sim`] samples stable and semistable laws and simulates paths on dyadic
//!   grids.
//! * [`estimators`] measures box-counting, covering, sojourn-time and energy
//!   statistics on simulated paths.
//! * [`harness`] binds theory to estimates in reproducible scenarios.
//! * [`io`] holds the on-disk formats (path dumps, CSV, JSON sidecars).

pub mod borel;
pub mod dimension;
pub mod estimators;
pub mod fit;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sim;
pub mod spectral;
pub mod stats;

pub use borel::BorelSetSpec;
pub use dimension::{Branch, DimensionInputs, DimensionResult, Formula};
pub use fit::ScalingFit;
pub use spectral::{ExponentSpec, SpectralDecomposition};
