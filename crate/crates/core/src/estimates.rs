//! Product norms of eigenfunctions, exponent fits and parameter sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Checked, Error, Result};
use crate::harmonics::{highest_weight_harmonic, random_combination, zonal_harmonic};
use crate::manifold::{
    build_reduced_grid, dyadic_project, evaluate, lp_norm, smoothed_project, synthesize,
    DyadicMode, Manifold, Mode, Point, QuadratureGrid, SpectralField,
};

/// `Lambda(2, nu) = nu^{1/4}`, `Lambda(3, nu) = (nu log nu)^{1/2}`,
/// `Lambda(d, nu) = nu^{(d-2)/2}` for `d >= 4`.
pub fn lambda_growth(d: u32, nu: f64) -> Result<f64> {
    if !(nu >= 1.0) {
        return Err(Error::Domain(format!("nu must be >= 1, got {nu}")));
    }
    match d {
        0 | 1 => Err(Error::Parameter(format!("dimension must be >= 2, got {d}"))),
        2 => Ok(nu.powf(0.25)),
        3 => Ok((nu * nu.ln()).sqrt()),
        _ => Ok(nu.powf((d as f64 - 2.0) / 2.0)),
    }
}

/// `L^2` norm of the pointwise product of the factors, by quadrature.
///
/// Flagged when the grid does not integrate the squared product exactly.
pub fn multilinear_l2(factors: &[&SpectralField], grid: &QuadratureGrid) -> Result<Checked<f64>> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Degenerate("no factors".into()))?;
    let total_degree: u32 = factors.iter().map(|f| f.max_degree()).sum();
    let mut flagged = grid.exactness() < 2 * total_degree;
    let head = synthesize(first, grid)?;
    flagged |= head.under_resolved;
    let mut prod = head.value;
    for f in rest {
        let vals = synthesize(f, grid)?;
        flagged |= vals.under_resolved;
        prod = prod.mul(&vals.value)?;
    }
    Ok(Checked::flagged(prod.norm_sqr().sqrt(), flagged))
}

/// Product norm divided by the product of the factor norms.
pub fn estimate_ratio(factors: &[&SpectralField], grid: &QuadratureGrid) -> Result<Checked<f64>> {
    let mut denom = 1.0;
    for f in factors {
        let n = f.l2_norm();
        if n == 0.0 {
            return Err(Error::Degenerate("zero factor".into()));
        }
        denom *= n;
    }
    Ok(multilinear_l2(factors, grid)?.map(|v| v / denom))
}

/// Smallest reduced grid resolving the product of fields with these degrees.
pub fn product_grid(manifold: Manifold, degrees: &[u32]) -> Result<QuadratureGrid> {
    build_reduced_grid(manifold, 2 * degrees.iter().sum::<u32>())
}

/// Ordinary least squares of `log y` against `log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub range: (f64, f64),
}

pub fn exponent_fit(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 samples, got {}", samples.len())));
    }
    if let Some(bad) = samples.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain(format!("nonpositive sample {bad:?}")));
    }
    let n = samples.len() as f64;
    let lx: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentFit {
        samples: samples.to_vec(),
        slope,
        intercept,
        residual_rms: (rss / n).sqrt(),
        range: (lo, hi),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatePoint {
    /// Values of the report's named parameters.
    pub params: Vec<f64>,
    /// Abscissa used in the fit.
    pub x: f64,
    pub ratio: f64,
    /// Model growth evaluated at `x`.
    pub model: f64,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub experiment: String,
    pub manifold: Manifold,
    pub families: Vec<String>,
    pub param_names: Vec<String>,
    pub points: Vec<EstimatePoint>,
    pub fit: ExponentFit,
    /// Fit of `ratio / sqrt(log x)`, reported for three-dimensional models.
    pub log_corrected_fit: Option<ExponentFit>,
    pub model_exponent: f64,
    /// `max ratio / model` over the sweep.
    pub bound_constant: f64,
}

impl EstimateReport {
    pub(crate) fn assemble(
        experiment: &str,
        manifold: Manifold,
        families: Vec<String>,
        param_names: &[&str],
        points: Vec<EstimatePoint>,
        model_exponent: f64,
        discard: usize,
        log_corrected: bool,
    ) -> Result<EstimateReport> {
        if let Some(bad) = points.iter().find(|p| !(p.ratio > 0.0 && p.ratio.is_finite())) {
            return Err(Error::Degenerate(format!("nonpositive ratio at {:?}", bad.params)));
        }
        let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let cut = xs.get(discard).copied().unwrap_or(f64::INFINITY);
        let kept: Vec<&EstimatePoint> = points.iter().filter(|p| p.x >= cut).collect();
        let fit = exponent_fit(&kept.iter().map(|p| (p.x, p.ratio)).collect::<Vec<_>>())?;
        let log_corrected_fit = if log_corrected {
            let s: Vec<(f64, f64)> = kept
                .iter()
                .filter(|p| p.x > 1.0)
                .map(|p| (p.x, p.ratio / p.x.ln().sqrt()))
                .collect();
            exponent_fit(&s).ok()
        } else {
            None
        };
        let bound_constant = points.iter().map(|p| p.ratio / p.model).fold(0.0, f64::max);
        Ok(EstimateReport {
            experiment: experiment.to_string(),
            manifold,
            families,
            param_names: param_names.iter().map(|s| s.to_string()).collect(),
            points,
            fit,
            log_corrected_fit,
            model_exponent,
            bound_constant,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimalityFamily {
    HighestWeight,
    Zonal,
}

/// Degrees in an optimality sweep: the schedule gives the smallest degree
/// `q`; the partner degree is `multiplier * q`, and a trilinear sweep adds a
/// fixed third degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalitySpec {
    pub d: u32,
    pub family: OptimalityFamily,
    pub arity: u32,
    pub schedule: Vec<u32>,
    pub multiplier: u32,
    pub fixed_degree: u32,
    /// Extra polynomial exactness added to every product grid.
    #[serde(default)]
    pub refine: u32,
}

impl OptimalitySpec {
    /// Defaults: `p = 2q` for highest weight, `p = 4q` for zonal, `r = 4`.
    pub fn new(d: u32, family: OptimalityFamily, arity: u32, schedule: Vec<u32>) -> Self {
        let multiplier = match family {
            OptimalityFamily::HighestWeight => 2,
            OptimalityFamily::Zonal => 4,
        };
        OptimalitySpec { d, family, arity, schedule, multiplier, fixed_degree: 4, refine: 0 }
    }

    pub fn model_exponent(&self) -> f64 {
        match (self.family, self.arity) {
            (OptimalityFamily::HighestWeight, 2) => (self.d as f64 - 1.0) / 4.0,
            (OptimalityFamily::Zonal, 2) => (self.d as f64 - 2.0) / 2.0,
            _ => 0.25,
        }
    }
}

fn family_member(d: u32, family: OptimalityFamily, p: u32) -> Result<SpectralField> {
    Ok(match family {
        OptimalityFamily::HighestWeight => highest_weight_harmonic(d, p)?.field().clone(),
        OptimalityFamily::Zonal => zonal_harmonic(d, p)?.field().clone(),
    })
}

/// Normalised product norms along an explicit family, with the fitted growth
/// exponent in the smallest degree. The two smallest degrees are excluded
/// from the fit.
pub fn optimality_sweep(spec: &OptimalitySpec) -> Result<EstimateReport> {
    if spec.schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("schedule must be strictly increasing".into()));
    }
    if !(spec.arity == 2 || spec.arity == 3) {
        return Err(Error::Parameter(format!("arity must be 2 or 3, got {}", spec.arity)));
    }
    if spec.arity == 3 && !(spec.d == 2 && spec.family == OptimalityFamily::HighestWeight) {
        return Err(Error::Parameter("trilinear sweeps use highest-weight harmonics on S2".into()));
    }
    let model = spec.model_exponent();
    let points: Vec<EstimatePoint> = spec
        .schedule
        .par_iter()
        .map(|&q| -> Result<EstimatePoint> {
            let mut degrees = vec![spec.multiplier * q, q];
            if spec.arity == 3 {
                degrees.push(spec.fixed_degree);
            }
            let fields: Vec<SpectralField> = degrees
                .iter()
                .map(|&p| family_member(spec.d, spec.family, p))
                .collect::<Result<_>>()?;
            let exact = 2 * degrees.iter().sum::<u32>() + spec.refine;
            let grid = build_reduced_grid(*fields[0].manifold(), exact)?;
            let refs: Vec<&SpectralField> = fields.iter().collect();
            let r = estimate_ratio(&refs, &grid)?;
            Ok(EstimatePoint {
                params: degrees.iter().map(|&p| p as f64).collect(),
                x: q as f64,
                ratio: r.value,
                model: (q as f64).powf(model),
                under_resolved: r.under_resolved,
            })
        })
        .collect::<Result<_>>()?;
    let manifold = match spec.family {
        OptimalityFamily::Zonal => Manifold::zonal(spec.d)?,
        OptimalityFamily::HighestWeight if spec.d == 2 => Manifold::S2 { rho: 1.0 },
        OptimalityFamily::HighestWeight => Manifold::S3,
    };
    let tag = match spec.family {
        OptimalityFamily::HighestWeight => "highest-weight",
        OptimalityFamily::Zonal => "zonal",
    };
    let names: &[&str] = if spec.arity == 3 { &["p", "q", "r"] } else { &["p", "q"] };
    EstimateReport::assemble(
        "optimality",
        manifold,
        vec![tag.to_string(); spec.arity as usize],
        names,
        points,
        model,
        2,
        spec.d == 3,
    )
}

/// Window `chi` of an approximate spectral projector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpectralWindow {
    /// `exp(-x^2 / (2 w^2))`.
    Gaussian { width: f64 },
    /// `exp(1 - 1 / (1 - (x/w)^2))` on `|x| < w`.
    Bump { width: f64 },
}

impl SpectralWindow {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SpectralWindow::Gaussian { width } => (-x * x / (2.0 * width * width)).exp(),
            SpectralWindow::Bump { width } => {
                let r = x / width;
                if r.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width beyond which the window is negligible (or zero).
    pub fn support(&self) -> f64 {
        match *self {
            SpectralWindow::Gaussian { width } => 8.5 * width,
            SpectralWindow::Bump { width } => width,
        }
    }

    fn validate(&self) -> Result<()> {
        let (SpectralWindow::Gaussian { width } | SpectralWindow::Bump { width }) = *self;
        if width.is_finite() && width > 0.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!("window width must be positive, got {width}")))
        }
    }
}

/// Random unit field inside a single torus sector whose frequencies
/// `sqrt(lambda)` lie within `[lo, hi]`.
pub fn random_sector_field(manifold: Manifold, lo: f64, hi: f64, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = match manifold {
        Manifold::S2 { rho } | Manifold::S2xS1 { rho } => rho.max(1.0),
        _ => 1.0,
    };
    let hi_deg = (hi.max(0.0) * rho).ceil() as u32 + 1;
    let (w1, w2) = match manifold {
        Manifold::S2 { .. } | Manifold::S2xS1 { .. } => (rng.random_range(-2..=2), 0),
        Manifold::S3 => (rng.random_range(-1..=1), rng.random_range(-1..=1)),
        Manifold::Zonal { .. } => (0, 0),
    };
    let modes: Vec<Mode> = manifold
        .modes_up_to(hi_deg)
        .into_iter()
        .filter(|m| {
            let sig = m.signature();
            let ok_sig = match manifold {
                Manifold::S2xS1 { .. } => sig == [w1, 0],
                _ => sig == [w1, w2],
            };
            let f = manifold.mode_eigenvalue(*m).unwrap_or(f64::NAN).sqrt();
            ok_sig && f >= lo && f <= hi
        })
        .collect();
    random_combination(manifold, &modes, rng.random())
}

/// `max_trials ||chi_lambda f chi_mu g|| / (||f|| ||g||)` for every pair of
/// centres `lambda <= mu`, normalised by `Lambda(d, min(lambda, mu))`.
///
/// Trial functions are random within a single torus sector, so products are
/// resolved by one-dimensional quadrature.
pub fn projector_sweep(
    manifold: Manifold,
    window: SpectralWindow,
    centers: &[f64],
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    window.validate()?;
    if centers.iter().any(|&c| !(c >= 1.0)) {
        return Err(Error::Parameter("centres must be >= 1".into()));
    }
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let d = manifold.dimension();
    let mut pairs = Vec::new();
    for (i, &lam) in centers.iter().enumerate() {
        for &mu in &centers[i..] {
            pairs.push((lam, mu));
        }
    }
    let sup = window.support();
    let chi = |x: f64| window.eval(x);
    let points: Vec<EstimatePoint> = pairs
        .par_iter()
        .enumerate()
        .map(|(pi, &(lam, mu))| -> Result<EstimatePoint> {
            let mut best = 0.0f64;
            let mut flagged = false;
            for t in 0..trials {
                let s = seed
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add((pi * trials + t) as u64);
                let f = random_sector_field(manifold, lam - sup, lam + sup, s)?;
                let g = random_sector_field(manifold, mu - sup, mu + sup, s ^ 0xA5A5_5A5A)?;
                let fl = smoothed_project(&f, chi, lam);
                let gm = smoothed_project(&g, chi, mu);
                let grid = product_grid(manifold, &[fl.max_degree(), gm.max_degree()])?;
                let r = multilinear_l2(&[&fl, &gm], &grid)?;
                flagged |= r.under_resolved;
                best = best.max(r.value / (f.l2_norm() * g.l2_norm()));
            }
            let nu = lam.min(mu);
            Ok(EstimatePoint {
                params: vec![lam, mu],
                x: nu,
                ratio: best,
                model: lambda_growth(d, nu)?,
                under_resolved: flagged,
            })
        })
        .collect::<Result<_>>()?;
    let model_exponent = match d {
        2 => 0.25,
        3 => 0.5,
        _ => (d as f64 - 2.0) / 2.0,
    };
    let tag = match window {
        SpectralWindow::Gaussian { .. } => "gaussian",
        SpectralWindow::Bump { .. } => "bump",
    };
    EstimateReport::assemble(
        "projector",
        manifold,
        vec![tag.to_string(); 2],
        &["lambda", "mu"],
        points,
        model_exponent,
        0,
        d == 3,
    )
}

/// Ratio of the largest to the smallest per-point quotient of two projector
/// sweeps over the same centres.
pub fn window_spread(a: &EstimateReport, b: &EstimateReport) -> Result<f64> {
    if a.points.len() != b.points.len() {
        return Err(Error::Mismatch("sweeps over different centres".into()));
    }
    let q: Vec<f64> = a.points.iter().zip(&b.points).map(|(x, y)| x.ratio / y.ratio).collect();
    let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi / lo)
}

/// `sup |Delta_N u| / ||Delta_N u||_{L^2}` over random sector fields (or
/// the zonal spectral-cluster kernel when `kernel` is set), for each dyadic `N`.
pub fn sup_ratio_sweep(
    manifold: Manifold,
    schedule: &[f64],
    trials: usize,
    seed: u64,
    kernel: bool,
) -> Result<EstimateReport> {
    let d = manifold.dimension();
    let points: Vec<EstimatePoint> = schedule
        .iter()
        .enumerate()
        .map(|(i, &n)| -> Result<EstimatePoint> {
            let deg = 2 * n as u32 + 1;
            let mut best = 0.0f64;
            let mut flagged = false;
            let count = if kernel { 1 } else { trials };
            for t in 0..count {
                let f = if kernel {
                    let modes: Vec<Mode> = manifold.modes_up_to(deg);
                    SpectralField::from_modes(
                        manifold,
                        modes.into_iter().map(|m| (m, num_complex::Complex64::new(1.0, 0.0))),
                    )?
                } else {
                    random_sector_field(manifold, 0.0, deg as f64, seed + (i * trials + t) as u64)?
                };
                let band = dyadic_project(&f, n, DyadicMode::Band)?;
                if band.is_empty() {
                    return Err(Error::Degenerate(format!("empty band at N = {n}")));
                }
                let grid = product_grid(manifold, &[band.max_degree()])?;
                let vals = synthesize(&band, &grid)?;
                flagged |= vals.under_resolved;
                let mut sup = lp_norm(&vals.value, f64::INFINITY)?;
                for x in [-1.0, 1.0] {
                    let pt = match manifold {
                        Manifold::S2 { .. } => Point::S2 { x, phi: 0.0 },
                        Manifold::S3 => Point::S3 { x, phi1: 0.0, phi2: 0.0 },
                        Manifold::S2xS1 { .. } => Point::S2xS1 { x, phi: 0.0, psi: 0.0 },
                        Manifold::Zonal { .. } => Point::Zonal { x },
                    };
                    sup = sup.max(evaluate(&band, pt)?.norm());
                }
                best = best.max(sup / band.l2_norm());
            }
            Ok(EstimatePoint {
                params: vec![n],
                x: n,
                ratio: best,
                model: n.powf(d as f64 / 2.0),
                under_resolved: flagged,
            })
        })
        .collect::<Result<_>>()?;
    EstimateReport::assemble(
        "sup-ratio",
        manifold,
        vec![if kernel { "kernel" } else { "random-sector" }.to_string()],
        &["N"],
        points,
        d as f64 / 2.0,
        0,
        false,
    )
}
