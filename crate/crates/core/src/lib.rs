//! Block-partitioned superintegrable Kepler–Coulomb systems.
//!
//! The crate builds the Hamiltonian `−Δ − η/r + Σ α_i/r_i²` for a partition of
//! the coordinates into blocks, all of its integrals of motion, and the closed
//! form spectrum. Operator identities are checked numerically by applying
//! expression trees to truncated Taylor series of random polynomials.

pub mod error;
pub mod jets;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod scalar;
pub mod spectral;
pub mod verify;

/// Version of this crate, recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use jets::{make_jet, Jet, Layout, Polynomial, TestFunction};
pub use operators::{apply, coeff_jet, CoeffFn, Evaluator, Exponent, Factor, OperatorExpr, EPS_SING};
pub use scalar::Scalar;
pub use model::{ModelSpec, Partition};
