//! Numerical laboratory for eigenfunction products on spheres and the
//! nonlinear Schrödinger flow they control.
//!
//! * [`harmonics`]: classical polynomials, quadrature rules and explicit
//!   spherical harmonics (zonal, highest weight, Hopf basis).
//! * [`manifold`]: spectra, product grids, spectral transforms, Sobolev norms
//!   and dyadic projectors.
//! * [`estimates`]: bilinear and trilinear product norms, exponent fits and
//!   parameter sweeps.
//! * [`lattice`]: exact lattice-point counters.
//! * [`evolution`]: Schrödinger propagation, split-step NLS, Strichartz and
//!   Bourgain norms.
//! * [`illposedness`]: the bump-profile norm-inflation experiment.

pub mod error;
pub mod estimates;
pub mod evolution;
pub mod harmonics;
pub mod illposedness;
pub mod lattice;
pub mod manifold;

pub use error::{Checked, Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
