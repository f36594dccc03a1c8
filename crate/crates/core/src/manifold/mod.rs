//! Manifolds, their spectra and eigenbases, quadrature grids and transforms.
//!
//! Four manifolds are supported: the round sphere `S^2` of radius `rho`, the
//! unit `S^3` in Hopf coordinates, the product `S^2_rho x S^1` (circle of
//! length `2 pi`), and the zonal (axially symmetric) sector of `S^d` for
//! `d = 2, 3, 4`. Every eigenfunction factors as a polar profile times a
//! character of the azimuthal torus, which is what the transforms exploit.

mod field;
mod grid;
mod projectors;
mod transform;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::special::{
    jacobi_orthonormal_column, legendre_normalized_column, zonal_column,
};

pub use field::SpectralField;
pub use grid::{build_grid, build_reduced_grid, lp_norm, GridFunction, QuadratureGrid};
pub use projectors::{
    dyadic_project, japanese, smoothed_project, sobolev_norm, validate_dyadic, DyadicMode,
};
pub(crate) use projectors::in_band;
pub use transform::{analyze, evaluate, synthesize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Manifold {
    S2 { rho: f64 },
    S3,
    S2xS1 { rho: f64 },
    /// Axially symmetric functions on `S^dim` (unit radius).
    Zonal { dim: u32 },
}

/// A single basis eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    /// `Y_n^m` on `S^2_rho`.
    S2 { n: u32, m: i32 },
    /// Hopf harmonic of degree `p` with torus weights `(m1, m2)`.
    S3 { p: u32, m1: i32, m2: i32 },
    /// `e^{i m psi} Y_n^order`.
    S2xS1 { m: i32, n: u32, order: i32 },
    Zonal { p: u32 },
}

/// Label of an eigenspace of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EigenIndex {
    S2 { n: u32 },
    /// `k = p + 1 >= 1`, eigenvalue `k^2 - 1`.
    S3 { k: u32 },
    S2xS1 { m: i32, n: u32 },
    Zonal { p: u32 },
}

/// A point given by its polar variable and azimuthal angles.
///
/// `x` is `cos(theta)` on `S^2`, `S^2 x S^1` and the zonal sectors, and
/// `cos(2 eta)` in Hopf coordinates on `S^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    S2 { x: f64, phi: f64 },
    S3 { x: f64, phi1: f64, phi2: f64 },
    S2xS1 { x: f64, phi: f64, psi: f64 },
    Zonal { x: f64 },
}

impl Point {
    /// Hopf point `(cos eta e^{i phi1}, sin eta e^{i phi2})`.
    pub fn hopf(eta: f64, phi1: f64, phi2: f64) -> Point {
        Point::S3 { x: (2.0 * eta).cos(), phi1, phi2 }
    }

    pub fn spherical(theta: f64, phi: f64) -> Point {
        Point::S2 { x: theta.cos(), phi }
    }

    pub(crate) fn parts(&self) -> (f64, [f64; 2]) {
        match *self {
            Point::S2 { x, phi } => (x, [phi, 0.0]),
            Point::S3 { x, phi1, phi2 } => (x, [phi1, phi2]),
            Point::S2xS1 { x, phi, psi } => (x, [phi, psi]),
            Point::Zonal { x } => (x, [0.0, 0.0]),
        }
    }
}

fn check_radius(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("radius must be positive, got {rho}")))
    }
}

impl Manifold {
    pub fn s2(rho: f64) -> Result<Manifold> {
        check_radius(rho)?;
        Ok(Manifold::S2 { rho })
    }

    pub fn s2xs1(rho: f64) -> Result<Manifold> {
        check_radius(rho)?;
        Ok(Manifold::S2xS1 { rho })
    }

    pub fn zonal(dim: u32) -> Result<Manifold> {
        if (2..=4).contains(&dim) {
            Ok(Manifold::Zonal { dim })
        } else {
            Err(Error::Parameter(format!("zonal sector supported for d in 2..=4, got {dim}")))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Manifold::S2 { rho } | Manifold::S2xS1 { rho } => check_radius(rho),
            Manifold::S3 => Ok(()),
            Manifold::Zonal { dim } => Manifold::zonal(dim).map(|_| ()),
        }
    }

    /// Topological dimension of the ambient manifold.
    pub fn dimension(&self) -> u32 {
        match *self {
            Manifold::S2 { .. } => 2,
            Manifold::S3 | Manifold::S2xS1 { .. } => 3,
            Manifold::Zonal { dim } => dim,
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Manifold::S2 { rho } => 4.0 * PI * rho * rho,
            Manifold::S3 => 2.0 * PI * PI,
            Manifold::S2xS1 { rho } => 8.0 * PI * PI * rho * rho,
            Manifold::Zonal { dim: 2 } => 4.0 * PI,
            Manifold::Zonal { dim: 3 } => 2.0 * PI * PI,
            Manifold::Zonal { .. } => 8.0 * PI * PI / 3.0,
        }
    }

    /// `1 / rho^2` on the spaces carrying a sphere of radius `rho`.
    pub fn kappa(&self) -> Option<f64> {
        match *self {
            Manifold::S2 { rho } | Manifold::S2xS1 { rho } => Some(1.0 / (rho * rho)),
            _ => None,
        }
    }

    /// Number of azimuthal angles in the coordinate system.
    pub(crate) fn azimuth_axes(&self) -> usize {
        match self {
            Manifold::S2 { .. } => 1,
            Manifold::S3 | Manifold::S2xS1 { .. } => 2,
            Manifold::Zonal { .. } => 0,
        }
    }

    /// True when every eigenvalue is an integer.
    pub fn integer_spectrum(&self) -> bool {
        match *self {
            Manifold::S3 | Manifold::Zonal { .. } => true,
            Manifold::S2 { rho } | Manifold::S2xS1 { rho } => rho == 1.0,
        }
    }

    pub fn eigenvalue(&self, index: EigenIndex) -> Result<f64> {
        match (*self, index) {
            (Manifold::S2 { rho }, EigenIndex::S2 { n }) => {
                let n = n as f64;
                Ok(n * (n + 1.0) / (rho * rho))
            }
            (Manifold::S3, EigenIndex::S3 { k }) if k >= 1 => {
                let k = k as f64;
                Ok(k * k - 1.0)
            }
            (Manifold::S2xS1 { rho }, EigenIndex::S2xS1 { m, n }) => {
                let (m, n) = (m as f64, n as f64);
                Ok(m * m + (n * n + n) / (rho * rho))
            }
            (Manifold::Zonal { dim }, EigenIndex::Zonal { p }) => {
                let p = p as f64;
                Ok(p * (p + dim as f64 - 1.0))
            }
            _ => Err(Error::Index(format!("{index:?} is not an eigen-index of {self:?}"))),
        }
    }

    pub fn validate_mode(&self, mode: Mode) -> Result<()> {
        let ok = match (*self, mode) {
            (Manifold::S2 { .. }, Mode::S2 { n, m }) => m.unsigned_abs() <= n,
            (Manifold::S3, Mode::S3 { p, m1, m2 }) => {
                let w = m1.unsigned_abs() + m2.unsigned_abs();
                w <= p && (p - w) % 2 == 0
            }
            (Manifold::S2xS1 { .. }, Mode::S2xS1 { n, order, .. }) => order.unsigned_abs() <= n,
            (Manifold::Zonal { .. }, Mode::Zonal { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Index(format!("{mode:?} is not a basis index of {self:?}")))
        }
    }

    pub fn eigen_index(&self, mode: Mode) -> Result<EigenIndex> {
        self.validate_mode(mode)?;
        Ok(match mode {
            Mode::S2 { n, .. } => EigenIndex::S2 { n },
            Mode::S3 { p, .. } => EigenIndex::S3 { k: p + 1 },
            Mode::S2xS1 { m, n, .. } => EigenIndex::S2xS1 { m, n },
            Mode::Zonal { p } => EigenIndex::Zonal { p },
        })
    }

    pub fn mode_eigenvalue(&self, mode: Mode) -> Result<f64> {
        self.eigenvalue(self.eigen_index(mode)?)
    }

    /// Orthonormal basis of the eigenspace `index`.
    pub fn eigenspace(&self, index: EigenIndex) -> Result<Vec<Mode>> {
        self.eigenvalue(index)?;
        Ok(match index {
            EigenIndex::S2 { n } => (-(n as i32)..=n as i32).map(|m| Mode::S2 { n, m }).collect(),
            EigenIndex::S3 { k } => {
                let p = k - 1;
                let p_i = p as i32;
                let mut out = Vec::new();
                for m1 in -p_i..=p_i {
                    for m2 in -p_i..=p_i {
                        let mode = Mode::S3 { p, m1, m2 };
                        if self.validate_mode(mode).is_ok() {
                            out.push(mode);
                        }
                    }
                }
                out
            }
            EigenIndex::S2xS1 { m, n } => (-(n as i32)..=n as i32)
                .map(|order| Mode::S2xS1 { m, n, order })
                .collect(),
            EigenIndex::Zonal { p } => vec![Mode::Zonal { p }],
        })
    }

    /// Basis of the degree-`p` spherical harmonics.
    pub fn modes_of_degree(&self, p: u32) -> Result<Vec<Mode>> {
        match self {
            Manifold::S2 { .. } => self.eigenspace(EigenIndex::S2 { n: p }),
            Manifold::S3 => self.eigenspace(EigenIndex::S3 { k: p + 1 }),
            Manifold::Zonal { .. } => self.eigenspace(EigenIndex::Zonal { p }),
            Manifold::S2xS1 { .. } => Err(Error::Index(
                "S2xS1 eigenspaces are labelled by (m, n), not by a single degree".into(),
            )),
        }
    }

    /// Every basis mode whose degree is at most `max_degree`, in canonical order.
    pub fn modes_up_to(&self, max_degree: u32) -> Vec<Mode> {
        let d = max_degree as i32;
        let mut out = Vec::new();
        match self {
            Manifold::S2xS1 { .. } => {
                for m in -d..=d {
                    for n in 0..=max_degree {
                        for order in -(n as i32)..=n as i32 {
                            out.push(Mode::S2xS1 { m, n, order });
                        }
                    }
                }
            }
            _ => {
                for p in 0..=max_degree {
                    out.extend(self.modes_of_degree(p).unwrap_or_default());
                }
            }
        }
        out.sort();
        out
    }

    /// Value of a basis mode at a point.
    pub fn basis_value(&self, mode: Mode, point: Point) -> Result<num_complex::Complex64> {
        self.validate_mode(mode)?;
        let (x, angles) = point.parts();
        let (sig, idx) = mode.split();
        let radial = self.radial_column(sig, idx, x)[idx as usize];
        let phase = sig[0] as f64 * angles[0] + sig[1] as f64 * angles[1];
        Ok(num_complex::Complex64::from_polar(radial, phase))
    }

    /// Polar profiles of every mode with azimuthal signature `sig` and
    /// radial index `0..=max_index`, at polar variable `x`.
    ///
    /// Angular normalisations are folded in, so that the mode equals
    /// `column[idx] * exp(i (sig . angles))`.
    pub(crate) fn radial_column(&self, sig: [i32; 2], max_index: u32, x: f64) -> Vec<f64> {
        match *self {
            Manifold::S2 { rho } => legendre_signed(sig[0], max_index, x, 1.0 / rho),
            Manifold::S2xS1 { rho } => {
                legendre_signed(sig[0], max_index, x, 1.0 / (rho * (2.0 * PI).sqrt()))
            }
            Manifold::S3 => {
                let a = sig[1].unsigned_abs();
                let b = sig[0].unsigned_abs();
                let pre = ((1.0 - x) / 2.0).max(0.0).powf(a as f64 / 2.0)
                    * ((1.0 + x) / 2.0).max(0.0).powf(b as f64 / 2.0)
                    / PI;
                let mut col = jacobi_orthonormal_column(a, b, max_index, x);
                col.iter_mut().for_each(|v| *v *= pre);
                col
            }
            Manifold::Zonal { dim } => zonal_column(dim, max_index, x),
        }
    }
}

fn legendre_signed(m: i32, max_index: u32, x: f64, scale: f64) -> Vec<f64> {
    let am = m.unsigned_abs();
    let sign = if m < 0 && am % 2 == 1 { -scale } else { scale };
    let mut col = legendre_normalized_column(am, am + max_index, x);
    col.iter_mut().for_each(|v| *v *= sign);
    col
}

impl Mode {
    /// Polynomial degree used for quadrature bookkeeping.
    pub fn degree(&self) -> u32 {
        match *self {
            Mode::S2 { n, .. } => n,
            Mode::S3 { p, .. } => p,
            Mode::S2xS1 { m, n, .. } => n.max(m.unsigned_abs()),
            Mode::Zonal { p } => p,
        }
    }

    /// Azimuthal frequencies of the mode.
    pub fn signature(&self) -> [i32; 2] {
        self.split().0
    }

    /// Azimuthal signature and position within that signature's polar family.
    pub(crate) fn split(&self) -> ([i32; 2], u32) {
        match *self {
            Mode::S2 { n, m } => ([m, 0], n - m.unsigned_abs()),
            Mode::S3 { p, m1, m2 } => ([m1, m2], (p - m1.unsigned_abs() - m2.unsigned_abs()) / 2),
            Mode::S2xS1 { m, n, order } => ([order, m], n - order.unsigned_abs()),
            Mode::Zonal { p } => ([0, 0], p),
        }
    }

    #[cfg(test)]
    pub(crate) fn from_split(manifold: &Manifold, sig: [i32; 2], idx: u32) -> Mode {
        match manifold {
            Manifold::S2 { .. } => Mode::S2 { n: sig[0].unsigned_abs() + idx, m: sig[0] },
            Manifold::S3 => Mode::S3 {
                p: 2 * idx + sig[0].unsigned_abs() + sig[1].unsigned_abs(),
                m1: sig[0],
                m2: sig[1],
            },
            Manifold::S2xS1 { .. } => Mode::S2xS1 {
                m: sig[1],
                n: sig[0].unsigned_abs() + idx,
                order: sig[0],
            },
            Manifold::Zonal { .. } => Mode::Zonal { p: idx },
        }
    }
}
