use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralField;
use crate::error::{Error, Result};

/// `<x> = (1 + x^2)^{1/2}`.
pub fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `(sum_k <lambda_k>^s |P_k u|^2)^{1/2}`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    field
        .iter()
        .map(|(m, c)| japanese(field.eigenvalue_of(*m)).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DyadicMode {
    /// `Delta_N`: keep `N <= <lambda>^{1/2} < 2N`.
    Band,
    /// `S_N`: keep `<lambda>^{1/2} < 2N`.
    Lowpass,
}

/// Accepts `N = 2^j` for `j >= -1`; `N = 1/2` is the empty projector.
pub fn validate_dyadic(n: f64) -> Result<()> {
    let j = n.log2();
    if n.is_finite() && n > 0.0 && j.fract() == 0.0 && j >= -1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{n} is not a dyadic number >= 1/2")))
    }
}

/// Tests `N <= <lambda>^{1/2} < 2N` via `N^4 <= 1 + lambda^2 < 16 N^4`.
pub(crate) fn in_band(lambda: f64, n: f64) -> bool {
    let j = 1.0 + lambda * lambda;
    let n4 = n.powi(4);
    n4 <= j && j < 16.0 * n4
}

pub fn dyadic_project(field: &SpectralField, n: f64, mode: DyadicMode) -> Result<SpectralField> {
    validate_dyadic(n)?;
    if n < 1.0 {
        return Ok(SpectralField::zero(*field.manifold()));
    }
    let n4 = 16.0 * n.powi(4);
    Ok(field.filter(|m| {
        let lam = field.eigenvalue_of(m);
        match mode {
            DyadicMode::Band => in_band(lam, n),
            DyadicMode::Lowpass => 1.0 + lam * lam < n4,
        }
    }))
}

/// `chi(sqrt(-Delta) - center)` applied to the field.
pub fn smoothed_project(
    field: &SpectralField,
    chi: impl Fn(f64) -> f64,
    center: f64,
) -> SpectralField {
    field.map(|m, c| c * Complex64::new(chi(field.eigenvalue_of(m).sqrt() - center), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Manifold, Mode};

    fn s3_field(max_p: u32) -> SpectralField {
        SpectralField::from_modes(
            Manifold::S3,
            (0..=max_p).map(|p| (Mode::S3 { p, m1: (p % 2) as i32, m2: 0 }, Complex64::new(1.0 + p as f64, 0.5))),
        )
        .unwrap()
    }

    #[test]
    fn band_membership_n2() {
        let f = s3_field(10);
        let band = dyadic_project(&f, 2.0, DyadicMode::Band).unwrap();
        let ks: Vec<u32> = band.iter().map(|(m, _)| m.degree() + 1).collect();
        assert_eq!(ks, vec![3, 4]);
    }

    #[test]
    fn dyadic_validation() {
        let f = s3_field(3);
        assert!(dyadic_project(&f, 3.0, DyadicMode::Band).is_err());
        assert!(dyadic_project(&f, 0.25, DyadicMode::Band).is_err());
        assert!(dyadic_project(&f, 0.5, DyadicMode::Lowpass).unwrap().is_empty());
    }

    #[test]
    fn sobolev_of_eigenfunction() {
        let f = SpectralField::single(Manifold::S3, Mode::S3 { p: 3, m1: 1, m2: 0 }).unwrap();
        assert_eq!(sobolev_norm(&f, 0.0), 1.0);
        let lam: f64 = 15.0;
        assert!((sobolev_norm(&f, 1.5) - japanese(lam).powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn smoothed_identity_and_center() {
        let f = s3_field(6);
        let same = smoothed_project(&f, |_| 1.0, 3.0);
        assert_eq!(same, f);
        let center = 15f64.sqrt();
        let g = smoothed_project(&f, |x| (-x * x).exp(), center);
        let mode = Mode::S3 { p: 3, m1: 1, m2: 0 };
        assert!((g.get(mode) - f.get(mode)).norm() < 1e-15);
    }
}
