//! Schrödinger propagation, split-step NLS, Strichartz product norms and
//! discrete Bourgain norms.
//!
//! Convention: `e^{it Delta}` multiplies the coefficient of an eigenmode with
//! eigenvalue `lambda` by `e^{-i lambda t}`.

mod collocation;
mod nls;
mod strichartz;
mod xsb;

pub use collocation::ZonalCollocation;
pub use nls::{nls_simulate, ConservationReport, NlsRun, SolverOptions, SolverStatus, Trajectory};
pub use strichartz::{bilinear_strichartz_sweep, strichartz_product_norm, StrichartzMethod};
pub use xsb::{
    hs_sup, l2_l2, linf_l2, time_freq_project, windowed_free_trajectory, xsb_norm,
    SampledTrajectory, WindowSpec, WINDOW_LENGTH,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Checked, Error, Result};
use crate::manifold::{synthesize, QuadratureGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    /// `F = 0`.
    Zero,
    /// `F(z) = |z|^{alpha - 1} z`.
    PurePower,
    /// `F(z) = (1 + |z|^2)^{(alpha - 1)/2} z`.
    SmoothPower,
}

/// Gauge-invariant nonlinearity `F(z) = g'(|z|^2) z` with potential `V`,
/// `F = dV / d(conj z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub alpha: f64,
    pub kind: NonlinearityKind,
}

impl Nonlinearity {
    pub fn new(alpha: f64, kind: NonlinearityKind) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must exceed 1, got {alpha}")));
        }
        Ok(Nonlinearity { alpha, kind })
    }

    pub fn zero() -> Self {
        Nonlinearity { alpha: 3.0, kind: NonlinearityKind::Zero }
    }

    pub fn pure_power(alpha: f64) -> Result<Self> {
        Self::new(alpha, NonlinearityKind::PurePower)
    }

    pub fn smooth_power(alpha: f64) -> Result<Self> {
        Self::new(alpha, NonlinearityKind::SmoothPower)
    }

    /// Phase rate `g'(s)` at `s = |z|^2`.
    pub fn rate(&self, s: f64) -> f64 {
        let e = (self.alpha - 1.0) / 2.0;
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::PurePower => s.powf(e),
            NonlinearityKind::SmoothPower => (1.0 + s).powf(e),
        }
    }

    pub fn force(&self, z: Complex64) -> Complex64 {
        z * self.rate(z.norm_sqr())
    }

    pub fn potential(&self, z: Complex64) -> f64 {
        let s = z.norm_sqr();
        let p = (self.alpha + 1.0) / 2.0;
        let c = 2.0 / (self.alpha + 1.0);
        match self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::PurePower => c * s.powf(p),
            NonlinearityKind::SmoothPower => c * ((1.0 + s).powf(p) - 1.0),
        }
    }

    /// Exact flow of `i u_t = F(u)` over time `t`.
    pub fn rotate(&self, z: Complex64, t: f64) -> Complex64 {
        z * Complex64::from_polar(1.0, -t * self.rate(z.norm_sqr()))
    }

    /// True when `F` is a polynomial in `(z, conj z)`.
    pub fn is_polynomial(&self) -> bool {
        match self.kind {
            NonlinearityKind::Zero => true,
            NonlinearityKind::PurePower => {
                let e = (self.alpha - 1.0) / 2.0;
                e.fract() == 0.0
            }
            NonlinearityKind::SmoothPower => false,
        }
    }
}

/// `e^{it Delta} u`.
pub fn linear_propagate(field: &SpectralField, t: f64) -> SpectralField {
    field.map(|m, c| c * Complex64::from_polar(1.0, -field.eigenvalue_of(m) * t))
}

/// `sum_k lambda_k |c_k|^2`.
pub fn gradient_energy(field: &SpectralField) -> f64 {
    field.iter().map(|(m, c)| field.eigenvalue_of(*m) * c.norm_sqr()).sum()
}

/// `E(u) = int |grad u|^2 + int V(u)`, the potential term by quadrature.
///
/// Flagged when the grid does not resolve the field.
pub fn energy(field: &SpectralField, nonlinearity: &Nonlinearity, grid: &QuadratureGrid) -> Result<Checked<f64>> {
    let kinetic = gradient_energy(field);
    if nonlinearity.kind == NonlinearityKind::Zero {
        return Ok(Checked::exact(kinetic));
    }
    let vals = synthesize(field, grid)?;
    let pot: f64 = vals
        .value
        .values()
        .iter()
        .enumerate()
        .map(|(i, z)| grid.weight(i) * nonlinearity.potential(*z))
        .sum();
    Ok(Checked::flagged(kinetic + pot, vals.under_resolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::random_combination;
    use crate::manifold::{build_grid, Manifold, Mode};
    use std::f64::consts::PI;

    #[test]
    fn gauge_and_potential_derivative() {
        for nl in [Nonlinearity::pure_power(3.0).unwrap(), Nonlinearity::smooth_power(7.0).unwrap(), Nonlinearity::pure_power(2.5).unwrap()] {
            for &(re, im) in &[(0.3, -0.7), (1.2, 0.4), (-0.05, 0.02)] {
                let z = Complex64::new(re, im);
                let th = 0.83;
                let rot = Complex64::from_polar(1.0, th);
                assert!((nl.force(rot * z) - rot * nl.force(z)).norm() < 1e-13);
                let h = 1e-6;
                let dx = (nl.potential(z + h) - nl.potential(z - h)) / (2.0 * h);
                let dy = (nl.potential(z + Complex64::new(0.0, h)) - nl.potential(z - Complex64::new(0.0, h))) / (2.0 * h);
                let wirtinger = Complex64::new(dx, dy) / 2.0;
                assert!((wirtinger - nl.force(z)).norm() < 1e-7, "{nl:?} {z}");
            }
        }
        assert!(Nonlinearity::pure_power(1.0).is_err());
    }

    #[test]
    fn propagation_periodic_on_s3() {
        let modes = Manifold::S3.modes_up_to(5);
        let f = random_combination(Manifold::S3, &modes, 4).unwrap();
        assert!(linear_propagate(&f, 0.0).sub(&f).unwrap().l2_norm() < 1e-15);
        assert!(linear_propagate(&f, 2.0 * PI).sub(&f).unwrap().l2_norm() < 1e-12);
        assert!((linear_propagate(&f, 0.37).l2_norm() - f.l2_norm()).abs() < 1e-14);
    }

    #[test]
    fn energy_of_constants_and_eigenmodes() {
        let c = Complex64::new(0.6, 0.2);
        let y0 = 1.0 / (2.0 * PI * PI).sqrt();
        let f = SpectralField::from_modes(Manifold::S3, [(Mode::S3 { p: 0, m1: 0, m2: 0 }, c / y0)]).unwrap();
        let grid = build_grid(Manifold::S3, 8).unwrap();
        let e = energy(&f, &Nonlinearity::pure_power(3.0).unwrap(), &grid).unwrap();
        assert!(!e.under_resolved);
        assert!((e.value - 2.0 * PI * PI * 0.5 * c.norm_sqr().powi(2)).abs() < 1e-12);
        let ek = SpectralField::single(Manifold::S3, Mode::S3 { p: 3, m1: 1, m2: 0 }).unwrap();
        assert_eq!(energy(&ek, &Nonlinearity::zero(), &grid).unwrap().value, 15.0);
    }
}
