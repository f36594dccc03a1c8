//! Norm inflation for the smooth-power NLS on the zonal sector of `S^3`.
//!
//! Data `u_n(0) = kappa_n n^{1/2} phi(n theta)` concentrate at a pole. On the
//! time scale `t_n` the Laplacian barely acts and the flow is close to the
//! pointwise phase rotation `v_n(t) = u_n(0) e^{-it f(u_n(0))}`, whose gradient
//! grows linearly in `t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{exponent_fit, ExponentFit};
use crate::evolution::{nls_simulate, Nonlinearity, SolverOptions, SolverStatus, ZonalCollocation};
use crate::harmonics::gauss_rule;
use crate::manifold::{sobolev_norm, SpectralField};

/// `phi(r) = amplitude * exp(-1 / (1 - r^2))` for `r < 1`, zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub amplitude: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile { amplitude: 1.0 }
    }
}

impl BumpProfile {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude > 0.0 && self.amplitude.is_finite() {
            Ok(())
        } else {
            Err(Error::Parameter(format!("bump amplitude must be positive, got {}", self.amplitude)))
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= 1.0 {
            0.0
        } else {
            self.amplitude * (-1.0 / (1.0 - r * r)).exp()
        }
    }

    /// `phi'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - r * r;
        -2.0 * r / (q * q) * self.eval(r)
    }

    pub fn max(&self) -> f64 {
        self.amplitude / std::f64::consts::E
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationConfig {
    pub alpha: f64,
    pub delta: f64,
    pub schedule: Vec<u32>,
    #[serde(default)]
    pub profile: BumpProfile,
    /// Collocation nodes per retained mode in the solver.
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    /// `dt * max(lambda_{N_max}, sup f(|u|))`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// States stored along each run, used for the distance to the ODE profile.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_oversample() -> usize {
    2
}

fn default_cfl() -> f64 {
    0.1
}

fn default_samples() -> usize {
    5
}

impl InflationConfig {
    pub fn new(alpha: f64, delta: f64, schedule: Vec<u32>) -> Self {
        InflationConfig {
            alpha,
            delta,
            schedule,
            profile: BumpProfile::default(),
            oversample: default_oversample(),
            cfl: default_cfl(),
            samples: default_samples(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        Nonlinearity::smooth_power(self.alpha)?;
        if !(self.delta > 0.0 && self.delta < 1.0 / (8.0 * self.alpha)) {
            return Err(Error::Parameter(format!(
                "delta must lie in (0, 1/(8 alpha)) = (0, {}), got {}",
                1.0 / (8.0 * self.alpha),
                self.delta
            )));
        }
        if let Some(&n) = self.schedule.iter().find(|&&n| n < 2) {
            return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
        }
        if self.oversample == 0 || !(self.cfl > 0.0) || self.samples < 2 {
            return Err(Error::Parameter("oversample >= 1, cfl > 0 and samples >= 2 required".into()));
        }
        Ok(())
    }

    /// `kappa_n = log(n)^{-delta}`.
    pub fn kappa(&self, n: u32) -> f64 {
        (n as f64).ln().powf(-self.delta)
    }

    /// `t_n = log(n)^{1/8} n^{-(alpha - 1)/2}`.
    pub fn t_n(&self, n: u32) -> f64 {
        (n as f64).ln().powf(0.125) * (n as f64).powf(-(self.alpha - 1.0) / 2.0)
    }

    /// `N_max = max(8n, 128)`.
    pub fn truncation(&self, n: u32) -> u32 {
        (8 * n).max(128)
    }

    /// Amplitude profile `A(theta) = kappa_n n^{1/2} phi(n theta)`.
    fn amplitude(&self, n: u32, theta: f64) -> f64 {
        self.kappa(n) * (n as f64).sqrt() * self.profile.eval(n as f64 * theta)
    }

    fn amplitude_derivative(&self, n: u32, theta: f64) -> f64 {
        let nf = n as f64;
        self.kappa(n) * nf.sqrt() * nf * self.profile.derivative(nf * theta)
    }
}

/// Coefficients of `kappa_n n^{1/2} phi(n theta)` up to degree `truncation`,
/// with the relative `L^2` mass beyond it.
pub fn bump_initial_with_tail(n: u32, config: &InflationConfig, truncation: u32) -> Result<(SpectralField, f64)> {
    config.validate()?;
    if n < 2 {
        return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
    }
    if truncation < 8 * n {
        return Err(Error::Precision(format!("truncation {truncation} is below 8n = {}", 8 * n)));
    }
    let fine = ZonalCollocation::new(4 * (truncation as usize + 1))?;
    let vals: Vec<Complex64> = fine.theta().iter().map(|t| Complex64::new(config.amplitude(n, *t), 0.0)).collect();
    let mut c = fine.analyze(&vals)?;
    let total: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let tail: f64 = c[truncation as usize + 1..].iter().map(|v| v.norm_sqr()).sum();
    c.truncate(truncation as usize + 1);
    let field = ZonalCollocation::new(c.len())?.field_of(&c)?;
    Ok((field, (tail / total).sqrt()))
}

/// `u_n(0)` truncated at `max(8n, 128)`.
pub fn bump_initial(n: u32, config: &InflationConfig) -> Result<SpectralField> {
    Ok(bump_initial_with_tail(n, config, config.truncation(n))?.0)
}

/// `v(t) = u0 e^{-it f(u0)}` with `f(z) = (1 + |z|^2)^{(alpha - 1)/2}`, pointwise.
pub fn ode_solution(u0: &[Complex64], t: f64, alpha: f64) -> Result<Vec<Complex64>> {
    let nl = Nonlinearity::smooth_power(alpha)?;
    Ok(u0.iter().map(|z| nl.rotate(*z, t)).collect())
}

/// `E_n(a - b) = (sum_k (n^2 + n^{-2} lambda_k^2) |a_k - b_k|^2)^{1/2}`.
pub fn en_distance(a: &SpectralField, b: &SpectralField, n: f64) -> Result<f64> {
    if a.manifold() != b.manifold() {
        return Err(Error::Parameter(format!("fields on {:?} and {:?}", a.manifold(), b.manifold())));
    }
    if !(n > 0.0) {
        return Err(Error::Parameter(format!("n must be positive, got {n}")));
    }
    let d = a.sub(b)?;
    Ok(d.iter()
        .map(|(m, c)| {
            let l = d.eigenvalue_of(*m);
            (n * n + l * l / (n * n)) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt())
}

/// `||grad v_n(t)||_{L^2}` from the closed form
/// `|d_theta v|^2 = A'^2 (1 + t^2 f'(A)^2 A^2)`, `f'(A) = (alpha - 1) A (1 + A^2)^{(alpha - 3)/2}`.
pub fn ode_gradient_analytic(n: u32, t: f64, config: &InflationConfig) -> f64 {
    let rule = gauss_rule(16).expect("fixed rule");
    let (x, w) = rule.composite(0.0, 1.0 / n as f64, 256);
    let a = config.alpha;
    let s: f64 = x
        .iter()
        .zip(&w)
        .map(|(th, w)| {
            let amp = config.amplitude(n, *th);
            let da = config.amplitude_derivative(n, *th);
            let fp = (a - 1.0) * amp * (1.0 + amp * amp).powf((a - 3.0) / 2.0);
            w * 4.0 * PI * th.sin().powi(2) * da * da * (1.0 + (t * fp * amp).powi(2))
        })
        .sum();
    s.sqrt()
}

/// `||grad v_n(t)||_{L^2}` from samples of `v_n(t)` alone: collocation
/// transform on `m` nodes and `sum lambda_p |c_p|^2`.
pub fn ode_gradient_spectral(n: u32, t: f64, config: &InflationConfig, m: usize) -> Result<f64> {
    let col = ZonalCollocation::new(m)?;
    let u0: Vec<Complex64> = col.theta().iter().map(|th| Complex64::new(config.amplitude(n, *th), 0.0)).collect();
    let v = ode_solution(&u0, t, config.alpha)?;
    let c = col.analyze(&v)?;
    Ok(c.iter().zip(col.eigenvalues()).map(|(c, l)| l * c.norm_sqr()).sum::<f64>().sqrt())
}

/// Largest collocation used by the spectral route.
pub const MAX_SPECTRAL_NODES: usize = 1 << 22;

/// Collocation size resolving the phase of `v_n(t)`.
fn spectral_nodes(n: u32, t: f64, config: &InflationConfig) -> usize {
    let a = config.alpha;
    let mut k: f64 = 0.0;
    for i in 0..2000 {
        let th = i as f64 / 2000.0 / n as f64;
        let amp = config.amplitude(n, th);
        let fp = (a - 1.0) * amp * (1.0 + amp * amp).powf((a - 3.0) / 2.0);
        k = k.max((t * fp * config.amplitude_derivative(n, th)).abs());
    }
    // Nodes per unit angle are (m + 1) / pi; ask for ~16 per local wavelength.
    let m = ((k + 40.0 * n as f64) * 16.0 / (2.0 * PI) * PI) as usize;
    m.next_power_of_two().max(1024) - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub n: u32,
    pub t: f64,
    pub analytic: f64,
    /// Spectral value, when it was computed at this time.
    pub spectral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub samples: Vec<GradientSample>,
    /// Per `n`: `(n, d/dt ||grad v_n||)` over the upper half of the schedule.
    pub rates: Vec<(u32, f64)>,
    /// Log-log fit of `rate / kappa_n^alpha` against `n`.
    pub rate_fit: Option<ExponentFit>,
    pub model_exponent: f64,
    /// Largest relative gap between the analytic and spectral values.
    pub max_route_gap: f64,
    /// Times where the spectral route would need more than [`MAX_SPECTRAL_NODES`].
    pub spectral_skipped: usize,
    /// `||grad v|| >= kappa (c t kappa^{alpha-1} n^{(alpha-1)/2} - C)` on every sample.
    pub c: f64,
    pub big_c: f64,
}

/// Gradient of the ODE profile on `t = s n^{-(alpha-1)/2}`, `s` in `scaled_times`.
///
/// The spectral route is evaluated at the first and last scaled time.
pub fn gradient_lower_bound_check(config: &InflationConfig, scaled_times: &[f64]) -> Result<GradientReport> {
    config.validate()?;
    if scaled_times.len() < 2 || scaled_times.windows(2).any(|w| w[0] >= w[1]) || scaled_times[0] < 0.0 {
        return Err(Error::Parameter("scaled times must be increasing, nonnegative, at least two".into()));
    }
    let a = config.alpha;
    let per_n: Vec<(Vec<GradientSample>, f64)> = config
        .schedule
        .par_iter()
        .map(|&n| -> Result<(Vec<GradientSample>, f64)> {
            let scale = (n as f64).powf(-(a - 1.0) / 2.0);
            let mut out = Vec::new();
            for (i, s) in scaled_times.iter().enumerate() {
                let t = s * scale;
                let analytic = ode_gradient_analytic(n, t, config);
                let m = spectral_nodes(n, t, config);
                let spectral = if (i == 0 || i + 1 == scaled_times.len()) && m < MAX_SPECTRAL_NODES {
                    Some(ode_gradient_spectral(n, t, config, m)?)
                } else {
                    None
                };
                out.push(GradientSample { n, t, analytic, spectral });
            }
            let half = &out[out.len() / 2..];
            let rate = if half.len() >= 2 {
                let (mt, mg) = (
                    half.iter().map(|g| g.t).sum::<f64>() / half.len() as f64,
                    half.iter().map(|g| g.analytic).sum::<f64>() / half.len() as f64,
                );
                let num: f64 = half.iter().map(|g| (g.t - mt) * (g.analytic - mg)).sum();
                let den: f64 = half.iter().map(|g| (g.t - mt).powi(2)).sum();
                num / den
            } else {
                let (p, q) = (&out[0], &out[out.len() - 1]);
                (q.analytic - p.analytic) / (q.t - p.t)
            };
            Ok((out, rate))
        })
        .collect::<Result<_>>()?;
    let samples: Vec<GradientSample> = per_n.iter().flat_map(|(s, _)| s.clone()).collect();
    let rates: Vec<(u32, f64)> = config.schedule.iter().copied().zip(per_n.iter().map(|p| p.1)).collect();
    let fit_pts: Vec<(f64, f64)> =
        rates.iter().map(|&(n, r)| (n as f64, r / config.kappa(n).powf(a))).collect();
    let rate_fit = exponent_fit(&fit_pts).ok();
    let max_route_gap = samples
        .iter()
        .filter_map(|g| g.spectral.map(|s| (s - g.analytic).abs() / g.analytic))
        .fold(0.0, f64::max);
    let spectral_skipped = config.schedule.len() * 2 - samples.iter().filter(|g| g.spectral.is_some()).count();
    let growth = |n: u32| config.kappa(n).powf(a) * (n as f64).powf((a - 1.0) / 2.0);
    let c = rates.iter().map(|&(n, r)| r / growth(n)).fold(f64::INFINITY, f64::min);
    let big_c = samples
        .iter()
        .map(|g| (c * g.t * growth(g.n) - g.analytic) / config.kappa(g.n))
        .fold(0.0, f64::max);
    Ok(GradientReport { samples, rates, rate_fit, model_exponent: (a - 1.0) / 2.0, max_route_gap, spectral_skipped, c, big_c })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationRow {
    pub n: u32,
    pub kappa: f64,
    pub t_n: f64,
    pub truncation: u32,
    /// Relative `L^2` mass of the datum beyond the truncation.
    pub truncation_tail: f64,
    pub dt: f64,
    pub steps: usize,
    pub h1_initial: f64,
    pub h1_final: f64,
    pub ratio: f64,
    /// `max_t E_n(u - v) / E_n(v)` over the stored times.
    pub en_relative: f64,
    pub mass_drift: f64,
    pub status: SolverStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub config: InflationConfig,
    pub rows: Vec<InflationRow>,
}

impl InflationReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    pub fn strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio > w[0].ratio)
    }
}

fn run_one(n: u32, config: &InflationConfig) -> Result<InflationRow> {
    let truncation = config.truncation(n);
    let (u0, tail) = bump_initial_with_tail(n, config, truncation)?;
    let nl = Nonlinearity::smooth_power(config.alpha)?;
    let lam_max = (truncation * (truncation + 2)) as f64;
    let a0 = config.kappa(n) * (n as f64).sqrt() * config.profile.max();
    let dt = config.cfl / lam_max.max(nl.rate(a0 * a0));
    let t_n = config.t_n(n);
    let options = SolverOptions { linear: true, nonlinear: true, samples: config.samples, oversample: config.oversample };
    let run = nls_simulate(&u0, t_n, dt, &nl, &options)?;
    let traj = &run.trajectory;
    let col = ZonalCollocation::new(traj.fields[0].len())?;
    let u0_coeffs = col.coefficients_of(&traj.fields[0])?;
    let u0_vals = col.synthesize(&u0_coeffs)?;
    let mut en_relative: f64 = 0.0;
    for (t, u) in traj.times.iter().zip(&traj.fields).skip(1) {
        let v = col.field_of(&col.analyze(&ode_solution(&u0_vals, *t, config.alpha)?)?)?;
        let zero = SpectralField::zero(*v.manifold());
        en_relative = en_relative.max(en_distance(u, &v, n as f64)? / en_distance(&v, &zero, n as f64)?);
    }
    let (_, last) = traj.last().expect("at least the initial state");
    let h1_initial = sobolev_norm(&u0, 1.0);
    let h1_final = sobolev_norm(last, 1.0);
    Ok(InflationRow {
        n,
        kappa: config.kappa(n),
        t_n,
        truncation,
        truncation_tail: tail,
        dt: traj.dt,
        steps: (t_n / traj.dt).round() as usize,
        h1_initial,
        h1_final,
        ratio: h1_final / h1_initial,
        en_relative,
        mass_drift: run.conservation.mass_drift,
        status: run.status,
    })
}

/// Full NLS solve to `t_n` for each `n`, compared with the ODE profile.
pub fn inflation_experiment(config: &InflationConfig) -> Result<InflationReport> {
    config.validate()?;
    let rows = config.schedule.par_iter().map(|&n| run_one(n, config)).collect::<Result<Vec<_>>>()?;
    Ok(InflationReport { config: config.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Manifold, Mode};

    fn config() -> InflationConfig {
        InflationConfig::new(7.0, 0.01, vec![8, 16])
    }

    #[test]
    fn profile_basics() {
        let p = BumpProfile::default();
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.eval(1.5), 0.0);
        assert!((p.eval(0.0) - p.max()).abs() < 1e-16);
        let h = 1e-6;
        let fd = (p.eval(0.4 + h) - p.eval(0.4 - h)) / (2.0 * h);
        assert!((fd - p.derivative(0.4)).abs() < 1e-8);
    }

    #[test]
    fn config_validation() {
        let mut c = config();
        assert!(c.validate().is_ok());
        c.delta = 0.1;
        assert!(c.validate().is_err());
        let mut c = config();
        c.schedule = vec![1];
        assert!(c.validate().is_err());
    }

    #[test]
    fn initial_datum() {
        let c = config();
        assert!(matches!(bump_initial_with_tail(8, &c, 40), Err(Error::Precision(_))));
        let (u, tail) = bump_initial_with_tail(8, &c, 128).unwrap();
        assert_eq!(u.max_degree(), 128);
        let (_, finer) = bump_initial_with_tail(8, &c, 256).unwrap();
        assert!(finer < tail && tail < 0.05, "{tail} {finer}");
    }

    #[test]
    fn ode_preserves_modulus() {
        let u0: Vec<Complex64> = (0..20).map(|i| Complex64::new(i as f64 * 0.1, -0.3)).collect();
        assert_eq!(ode_solution(&u0, 0.0, 7.0).unwrap(), u0);
        for (a, b) in ode_solution(&u0, 0.7, 7.0).unwrap().iter().zip(&u0) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn en_distance_examples() {
        let m = Manifold::Zonal { dim: 3 };
        let e = SpectralField::single(m, Mode::Zonal { p: 3 }).unwrap();
        let z = SpectralField::zero(m);
        let n = 4.0;
        assert_eq!(en_distance(&e, &e, n).unwrap(), 0.0);
        assert!((en_distance(&e, &z, n).unwrap() - (n * n + 225.0 / (n * n)).sqrt()).abs() < 1e-12);
        let s = Complex64::new(0.0, -2.5);
        assert!((en_distance(&e.scale(s), &z, n).unwrap() - 2.5 * en_distance(&e, &z, n).unwrap()).abs() < 1e-12);
        assert!(en_distance(&e, &SpectralField::zero(Manifold::S3), n).is_err());
    }

    #[test]
    fn gradient_routes_agree_at_zero() {
        let c = config();
        let a = ode_gradient_analytic(8, 0.0, &c);
        let s = ode_gradient_spectral(8, 0.0, &c, 2047).unwrap();
        assert!((a - s).abs() < 1e-8 * a, "{a} {s}");
    }
}
