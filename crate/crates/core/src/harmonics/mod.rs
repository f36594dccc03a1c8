//! Special functions and explicit eigenfunction families on spheres.

mod quadrature;
pub mod special;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{EigenIndex, Manifold, Mode, SpectralField};

pub use quadrature::{chebyshev_u_rule, gauss_rule, GaussRule};
pub use special::{special_eval, Family, PolynomialFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HarmonicKind {
    Zonal,
    HighestWeight,
    Basis,
    Random,
}

/// A spherical harmonic stored with unit `L^2` norm, together with the norm
/// of its classical (raw) normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    kind: HarmonicKind,
    degree: u32,
    field: SpectralField,
    raw_norm: f64,
}

impl Harmonic {
    pub fn kind(&self) -> HarmonicKind {
        self.kind
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn manifold(&self) -> &Manifold {
        self.field.manifold()
    }

    /// The unit-norm harmonic.
    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    /// `L^2` norm of the raw variant: the Gegenbauer polynomial for zonal
    /// harmonics, `(x1 + i x2)^p` for highest-weight ones, 1 otherwise.
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    pub fn raw_field(&self) -> SpectralField {
        self.field.scale(Complex64::new(self.raw_norm, 0.0))
    }

    pub fn eigenvalue(&self) -> f64 {
        let (mode, _) = self.field.iter().next().expect("harmonics are nonzero");
        self.field.eigenvalue_of(*mode)
    }
}

impl AsRef<SpectralField> for Harmonic {
    fn as_ref(&self) -> &SpectralField {
        &self.field
    }
}

/// Degree-`p` zonal harmonic on `S^d`, depending only on the polar angle.
pub fn zonal_harmonic(d: u32, p: u32) -> Result<Harmonic> {
    let manifold = Manifold::zonal(d)?;
    Ok(Harmonic {
        kind: HarmonicKind::Zonal,
        degree: p,
        field: SpectralField::single(manifold, Mode::Zonal { p })?,
        raw_norm: special::zonal_raw_norm(d, p),
    })
}

/// `(x1 + i x2)^p` on the unit `S^2` or `S^3`.
pub fn highest_weight_harmonic(d: u32, p: u32) -> Result<Harmonic> {
    let (manifold, mode, coeff, raw_sq_ln) = match d {
        2 => {
            // 2 pi 2^{2p+1} (p!)^2 / (2p+1)!
            let ln = (2.0 * PI).ln() + (2 * p + 1) as f64 * 2f64.ln()
                + 2.0 * special::ln_factorial(p)
                - special::ln_factorial(2 * p + 1);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            (Manifold::S2 { rho: 1.0 }, Mode::S2 { n: p, m: p as i32 }, sign, ln)
        }
        3 => {
            let ln = (2.0 * PI * PI / (p as f64 + 1.0)).ln();
            (Manifold::S3, Mode::S3 { p, m1: p as i32, m2: 0 }, 1.0, ln)
        }
        _ => {
            return Err(Error::Parameter(format!(
                "highest-weight harmonics are built for d in {{2, 3}}, got {d}"
            )))
        }
    };
    Ok(Harmonic {
        kind: HarmonicKind::HighestWeight,
        degree: p,
        field: SpectralField::from_modes(manifold, [(mode, Complex64::new(coeff, 0.0))])?,
        raw_norm: (0.5 * raw_sq_ln).exp(),
    })
}

/// Orthonormal `Y_n^m` on the sphere of radius `rho`.
pub fn s2_basis(n: u32, m: i32, rho: f64) -> Result<Harmonic> {
    let manifold = Manifold::s2(rho)?;
    Ok(Harmonic {
        kind: HarmonicKind::Basis,
        degree: n,
        field: SpectralField::single(manifold, Mode::S2 { n, m })?,
        raw_norm: 1.0,
    })
}

/// Orthonormal Hopf harmonic `e^{i m1 phi1} e^{i m2 phi2} R(cos 2 eta)`.
pub fn s3_hopf_basis(p: u32, m1: i32, m2: i32) -> Result<Harmonic> {
    Ok(Harmonic {
        kind: HarmonicKind::Basis,
        degree: p,
        field: SpectralField::single(Manifold::S3, Mode::S3 { p, m1, m2 })?,
        raw_norm: 1.0,
    })
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Unit-norm complex Gaussian combination of `modes`, deterministic in `seed`.
pub fn random_combination(manifold: Manifold, modes: &[Mode], seed: u64) -> Result<SpectralField> {
    if modes.is_empty() {
        return Err(Error::Degenerate("no modes to combine".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Complex64> = modes.iter().map(|_| gaussian(&mut rng)).collect();
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    SpectralField::from_modes(manifold, modes.iter().copied().zip(coeffs.into_iter().map(|c| c / norm)))
}

/// Random unit element of the degree-`p` eigenspace.
pub fn random_harmonic(manifold: Manifold, p: u32, seed: u64) -> Result<Harmonic> {
    let modes = manifold.modes_of_degree(p)?;
    Ok(Harmonic {
        kind: HarmonicKind::Random,
        degree: p,
        field: random_combination(manifold, &modes, seed)?,
        raw_norm: 1.0,
    })
}

/// Random unit element of an arbitrary eigenspace, including those of
/// `S^2 x S^1`.
pub fn random_eigen_field(manifold: Manifold, index: EigenIndex, seed: u64) -> Result<SpectralField> {
    random_combination(manifold, &manifold.eigenspace(index)?, seed)
}

/// One sample of the polar asymptotics of `Z_p` on `S^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SzegoSample {
    pub exact: f64,
    pub asymptotic: f64,
    pub residual: f64,
}

/// Compares the normalised zonal `Z_p(theta)` on `S^3` with
/// `cos((p + 1) theta - pi/2) / (pi sqrt 2 sin theta)`.
///
/// `theta` must lie in `[c/p, pi - c/p]`. The residual is scaled by
/// `p sin(theta)`.
pub fn szego_check(d: u32, p: u32, theta: f64, c: f64) -> Result<SzegoSample> {
    if d != 3 {
        return Err(Error::Parameter(format!(
            "the phase constants are only fixed for d = 3; use szego_fit for d = {d}"
        )));
    }
    if p == 0 || !(c > 0.0) {
        return Err(Error::Parameter("need p >= 1 and c > 0".into()));
    }
    let lo = c / p as f64;
    if !(theta >= lo && theta <= PI - lo) {
        return Err(Error::Domain(format!("theta = {theta} outside [{lo}, pi - {lo}]")));
    }
    let exact = special::zonal_column(3, p, theta.cos())[p as usize];
    let s = theta.sin();
    let asymptotic = ((p as f64 + 1.0) * theta - PI / 2.0).cos() / (PI * 2f64.sqrt() * s);
    Ok(SzegoSample { exact, asymptotic, residual: (exact - asymptotic).abs() * p as f64 * s })
}

/// Least-squares fit of `Z_p(theta) sin(theta)^{(d-1)/2} ~ A cos((p + a) theta + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SzegoFit {
    pub alpha: f64,
    pub beta: f64,
    pub amplitude: f64,
    pub rms: f64,
}

pub fn szego_fit(d: u32, p: u32, thetas: &[f64]) -> Result<SzegoFit> {
    Manifold::zonal(d)?;
    if thetas.len() < 3 {
        return Err(Error::Degenerate("need at least three angles".into()));
    }
    let lam = (d as f64 - 1.0) / 2.0;
    let ys: Vec<f64> = thetas
        .iter()
        .map(|&t| special::zonal_column(d, p, t.cos())[p as usize] * t.sin().powf(lam))
        .collect();
    // For a fixed shift the model is linear in (A cos b, -A sin b).
    let fit_at = |a: f64| -> (f64, f64, f64) {
        let (mut scc, mut sss, mut scs, mut syc, mut sys) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in thetas.iter().zip(&ys) {
            let ph = (p as f64 + a) * t;
            let (s, c) = ph.sin_cos();
            scc += c * c;
            sss += s * s;
            scs += c * s;
            syc += y * c;
            sys += y * s;
        }
        let det = scc * sss - scs * scs;
        let u = (syc * sss - sys * scs) / det;
        let v = (sys * scc - syc * scs) / det;
        let rss: f64 = thetas
            .iter()
            .zip(&ys)
            .map(|(&t, &y)| {
                let ph = (p as f64 + a) * t;
                let r = y - u * ph.cos() - v * ph.sin();
                r * r
            })
            .sum();
        (u, v, rss)
    };
    let mut best = (0.0, f64::INFINITY);
    let steps = 4000;
    for i in 0..=steps {
        let a = -1.0 + 4.0 * i as f64 / steps as f64;
        let rss = fit_at(a).2;
        if rss < best.1 {
            best = (a, rss);
        }
    }
    let (mut lo, mut hi) = (best.0 - 1e-3, best.0 + 1e-3);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if fit_at(m1).2 < fit_at(m2).2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let (u, v, rss) = fit_at(alpha);
    Ok(SzegoFit {
        alpha,
        beta: (-v).atan2(u),
        amplitude: u.hypot(v),
        rms: (rss / thetas.len() as f64).sqrt(),
    })
}
