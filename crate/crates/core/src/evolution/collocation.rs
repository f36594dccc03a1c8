use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Mode, SpectralField};

/// Collocation transform for the zonal sector of `S^3`.
///
/// With `M` nodes `theta_j = j pi / (M + 1)` and modes `p = 0..M`, the zonal
/// harmonic is `Z_p = sin((p + 1) theta) / (sin(theta) sqrt(2 pi^2))`, and the
/// map from `sqrt(w_j) u(theta_j)` to coefficients is the orthogonal DST-I.
/// Both directions are isometries between coefficient `l2` and the
/// grid-weighted norm.
pub struct ZonalCollocation {
    m: usize,
    theta: Vec<f64>,
    sqrt_w: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ZonalCollocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZonalCollocation").field("m", &self.m).finish()
    }
}

impl ZonalCollocation {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("collocation needs at least one node".into()));
        }
        let h = PI / (m as f64 + 1.0);
        let theta: Vec<f64> = (1..=m).map(|j| j as f64 * h).collect();
        let sqrt_w = theta.iter().map(|t| (4.0 * PI * h).sqrt() * t.sin()).collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        Ok(ZonalCollocation { m, theta, sqrt_w, fft })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Polar angles of the nodes, increasing.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Quadrature weights for the surface measure of `S^3`.
    pub fn weights(&self) -> Vec<f64> {
        self.sqrt_w.iter().map(|s| s * s).collect()
    }

    /// `lambda_p = p (p + 2)` for the modes `p = 0..M`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.m).map(|p| (p * (p + 2)) as f64).collect()
    }

    /// Orthonormal DST-I: `y_k = sqrt(2 / (M + 1)) sum_j a_j sin(pi k j / (M + 1))`.
    fn dst(&self, a: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * (m + 1)];
        for (j, &v) in a.iter().enumerate() {
            buf[j + 1] = v;
            buf[2 * (m + 1) - (j + 1)] = -v;
        }
        self.fft.process(&mut buf);
        let s = (2.0 / (m as f64 + 1.0)).sqrt() * 0.5;
        (1..=m).map(|k| Complex64::new(0.0, s) * buf[k]).collect()
    }

    /// Coefficients of `Z_0..Z_{M-1}` from nodal values.
    pub fn analyze(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(values.len())?;
        let a: Vec<Complex64> = values.iter().zip(&self.sqrt_w).map(|(v, s)| v * s).collect();
        Ok(self.dst(&a))
    }

    /// Nodal values from coefficients of `Z_0..Z_{M-1}`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(coeffs.len())?;
        Ok(self.dst(coeffs).iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect())
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == self.m {
            Ok(())
        } else {
            Err(Error::Mismatch(format!("expected {} values, got {n}", self.m)))
        }
    }

    /// Coefficient vector of a zonal `S^3` field; modes beyond `M - 1` are an error.
    pub fn coefficients_of(&self, field: &SpectralField) -> Result<Vec<Complex64>> {
        if *field.manifold() != (Manifold::Zonal { dim: 3 }) {
            return Err(Error::Mismatch(format!("expected the zonal S3 sector, got {:?}", field.manifold())));
        }
        if field.max_degree() as usize >= self.m {
            return Err(Error::Precision(format!(
                "degree {} does not fit {} collocation modes",
                field.max_degree(),
                self.m
            )));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.m];
        for (mode, v) in field.iter() {
            c[mode.degree() as usize] = *v;
        }
        Ok(c)
    }

    pub fn field_of(&self, coeffs: &[Complex64]) -> Result<SpectralField> {
        SpectralField::from_modes(
            Manifold::Zonal { dim: 3 },
            coeffs.iter().enumerate().map(|(p, &c)| (Mode::Zonal { p: p as u32 }, c)),
        )
    }
}
