//! Generalized p-Faber polynomials on Jordan curves, weighted Riemann
//! boundary value problems and expansions in the double Faber system.
//!
//! The crate is organised bottom-up:
//!
//! * [`curve`]: parametric Jordan curves, arc-length discretization and a
//!   Carleson (regularity) estimator.
//! * [`weights`]: power weights, Muckenhoupt scans, admissibility exponents
//!   and weighted Lebesgue norms.
//! * [`cauchy`]: Cauchy integrals, the singular operator and
//!   Sokhotskii-Plemelj traces.
//! * [`conformal`]: exterior and interior conformal maps with branched roots.
//! * [`faber`]: the polynomials `F+_{p,n}` and `F-_{p,n}`.
//! * [`riemann`]: canonical solutions and the (non)homogeneous problem
//!   `A F+ + B F- = f`.
//! * [`expansion`]: coefficient extraction in the single and double systems.

pub mod cauchy;
pub mod conformal;
pub mod curve;
mod error;
pub mod expansion;
pub mod faber;
pub mod riemann;
pub mod samples;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
