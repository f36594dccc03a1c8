use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::harmonics::gauss_rule;
use crate::manifold::{japanese, validate_dyadic, Manifold, Mode, SpectralField};

/// Length of the periodised time window `[-4, 4)`.
pub const WINDOW_LENGTH: f64 = 8.0;

const PAD: usize = 4;
const ALIAS_TOL: f64 = 1e-10;

/// Smooth time cutoff equal to 1 on `[-inner, inner]` and vanishing outside
/// `[-outer, outer]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub inner: f64,
    pub outer: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { inner: 1.0, outer: 2.0 }
    }
}

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.inner && self.inner < self.outer && self.outer < WINDOW_LENGTH / 2.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "window needs 0 < inner < outer < {}, got {self:?}",
                WINDOW_LENGTH / 2.0
            )))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        1.0 - smooth_step((t.abs() - self.inner) / (self.outer - self.inner))
    }

    /// `hat psi(tau) = int psi(t) e^{-i tau t} dt`, real since `psi` is even.
    pub fn fourier(&self, tau: f64) -> f64 {
        let (x, w) = self.time_nodes(tau.abs());
        fourier_on(&x, &w, tau)
    }

    /// Gauss nodes on `[0, outer]` carrying `w * psi`, fine enough for
    /// frequencies up to `tau_max`.
    fn time_nodes(&self, tau_max: f64) -> (Vec<f64>, Vec<f64>) {
        let rule = gauss_rule(16).expect("fixed rule");
        let panels = (tau_max * self.outer / PI).ceil() as usize + 32;
        let (x, w) = rule.composite(0.0, self.outer, panels);
        let w = x.iter().zip(w).map(|(t, w)| w * self.eval(*t)).collect();
        (x, w)
    }

    /// `||psi||_{H^b} = ((2 pi)^{-1} int <tau>^{2b} |hat psi(tau)|^2 dtau)^{1/2}`,
    /// by direct quadrature of the transform.
    pub fn hb_norm(&self, b: f64) -> f64 {
        // The transform is below 1e-14 beyond |tau| ~ 400 for the default window.
        let tau_max = 600.0 / (self.outer - self.inner).min(1.0);
        let (tx, tw) = self.time_nodes(tau_max);
        let rule = gauss_rule(8).expect("fixed rule");
        let (x, w) = rule.composite(0.0, tau_max, (tau_max * self.outer / 2.0) as usize);
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(t, w)| w * japanese(*t).powf(2.0 * b) * fourier_on(&tx, &tw, *t).powi(2))
            .sum();
        (s / PI).sqrt()
    }
}

fn fourier_on(x: &[f64], w: &[f64], tau: f64) -> f64 {
    2.0 * x.iter().zip(w).map(|(t, w)| w * (tau * t).cos()).sum::<f64>()
}

/// Spectral coefficients sampled on a uniform time grid covering one period
/// of length `WINDOW_LENGTH` starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    pub manifold: Manifold,
    pub t0: f64,
    pub dt: f64,
    pub samples: usize,
    pub series: BTreeMap<Mode, Vec<Complex64>>,
}

impl SampledTrajectory {
    pub fn zero(manifold: Manifold, samples: usize) -> Self {
        SampledTrajectory {
            manifold,
            t0: -WINDOW_LENGTH / 2.0,
            dt: WINDOW_LENGTH / samples as f64,
            samples,
            series: BTreeMap::new(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|j| self.t0 + j as f64 * self.dt).collect()
    }

    /// Field at sample `j`.
    pub fn field_at(&self, j: usize) -> Result<SpectralField> {
        SpectralField::from_modes(self.manifold, self.series.iter().map(|(m, v)| (*m, v[j])))
    }

    /// Converts a solver trajectory on a uniform time grid.
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let n = traj.times.len();
        if n < 2 {
            return Err(Error::Parameter("need at least two samples".into()));
        }
        let dt = traj.times[1] - traj.times[0];
        if traj.times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0)) {
            return Err(Error::Parameter("time grid is not uniform".into()));
        }
        let manifold = *traj.fields[0].manifold();
        let mut series: BTreeMap<Mode, Vec<Complex64>> = BTreeMap::new();
        for (j, f) in traj.fields.iter().enumerate() {
            for (m, c) in f.iter() {
                series.entry(*m).or_insert_with(|| vec![Complex64::new(0.0, 0.0); n])[j] = *c;
            }
        }
        Ok(SampledTrajectory { manifold, t0: traj.times[0], dt, samples: n, series })
    }

    fn eigenvalue(&self, m: Mode) -> f64 {
        self.manifold.mode_eigenvalue(m).unwrap_or(f64::NAN)
    }
}

/// `psi(t) e^{it Delta} u0` sampled at `samples` points of `[-4, 4)`.
pub fn windowed_free_trajectory(u0: &SpectralField, window: &WindowSpec, samples: usize) -> Result<SampledTrajectory> {
    window.validate()?;
    if samples < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    let mut traj = SampledTrajectory::zero(*u0.manifold(), samples);
    let times = traj.times();
    for (m, c) in u0.iter() {
        let lam = u0.eigenvalue_of(*m);
        let v = times
            .iter()
            .map(|t| c * window.eval(*t) * Complex64::from_polar(1.0, -lam * t))
            .collect();
        traj.series.insert(*m, v);
    }
    Ok(traj)
}

/// `hat c(tau_k)` on the zero-padded frequency grid, with `tau_k`.
fn spectrum(traj: &SampledTrajectory, v: &[Complex64], planner: &mut FftPlanner<f64>) -> (Vec<f64>, Vec<Complex64>) {
    let n = traj.samples * PAD;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..v.len()].copy_from_slice(v);
    planner.plan_fft_forward(n).process(&mut buf);
    let dtau = 2.0 * PI / (n as f64 * traj.dt);
    let taus = (0..n)
        .map(|k| {
            let k = if k >= n / 2 { k as f64 - n as f64 } else { k as f64 };
            k * dtau
        })
        .collect();
    buf.iter_mut().for_each(|c| *c *= traj.dt);
    (taus, buf)
}

fn check_aliasing(taus: &[f64], spec: &[Complex64], nyquist: f64, mode: Mode) -> Result<()> {
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let edge: f64 = taus
        .iter()
        .zip(spec)
        .filter(|(t, _)| t.abs() > 0.75 * nyquist)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    if total > 0.0 && edge > ALIAS_TOL * total {
        return Err(Error::Precision(format!(
            "time sampling aliases mode {mode:?}: {:.2e} of its energy sits near Nyquist",
            edge / total
        )));
    }
    Ok(())
}

/// `(sum_k <lambda_k>^s (2 pi)^{-1} int <tau + lambda_k>^{2b} |hat c_k(tau)|^2 dtau)^{1/2}`.
pub fn xsb_norm(traj: &SampledTrajectory, s: f64, b: f64) -> Result<f64> {
    let nyquist = PI / traj.dt;
    let mut planner = FftPlanner::new();
    let mut total = 0.0;
    for (m, v) in &traj.series {
        let lam = traj.eigenvalue(*m);
        let (taus, spec) = spectrum(traj, v, &mut planner);
        check_aliasing(&taus, &spec, nyquist, *m)?;
        let dtau = taus[1] - taus[0];
        let inner: f64 = taus
            .iter()
            .zip(&spec)
            .map(|(t, c)| japanese(t + lam).powf(2.0 * b) * c.norm_sqr())
            .sum();
        total += japanese(lam).powf(s) * inner * dtau / (2.0 * PI);
    }
    Ok(total.sqrt())
}

/// `Delta_{NL}`: keeps modes with `N <= <lambda>^{1/2} < 2N` and, on the
/// periodic time grid, frequencies with `L <= <tau + lambda> < 2L`.
pub fn time_freq_project(traj: &SampledTrajectory, n: f64, l: f64) -> Result<SampledTrajectory> {
    validate_dyadic(n)?;
    validate_dyadic(l)?;
    let mut out = SampledTrajectory { series: BTreeMap::new(), ..traj.clone() };
    let len = traj.samples;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let nyquist = PI / traj.dt;
    let dtau = 2.0 * PI / (len as f64 * traj.dt);
    for (m, v) in &traj.series {
        let lam = traj.eigenvalue(*m);
        if !crate::manifold::in_band(lam, n) {
            continue;
        }
        let mut buf = v.clone();
        fwd.process(&mut buf);
        let taus: Vec<f64> = (0..len)
            .map(|k| if k >= len / 2 { k as f64 - len as f64 } else { k as f64 } * dtau)
            .collect();
        check_aliasing(&taus, &buf, nyquist, *m)?;
        for (c, t) in buf.iter_mut().zip(&taus) {
            let j = japanese(t + lam);
            if !(l <= j && j < 2.0 * l) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        inv.process(&mut buf);
        buf.iter_mut().for_each(|c| *c /= len as f64);
        out.series.insert(*m, buf);
    }
    Ok(out)
}

/// `max_t ||u(t)||_{L^2}`.
pub fn linf_l2(traj: &SampledTrajectory) -> f64 {
    hs_sup(traj, 0.0)
}

/// `max_t ||u(t)||_{H^s}` with `||u||_{H^s}^2 = sum <lambda>^s |c|^2`.
pub fn hs_sup(traj: &SampledTrajectory, s: f64) -> f64 {
    let mut acc = vec![0.0; traj.samples];
    for (m, v) in &traj.series {
        let w = japanese(traj.eigenvalue(*m)).powf(s);
        acc.iter_mut().zip(v).for_each(|(a, c)| *a += w * c.norm_sqr());
    }
    acc.into_iter().fold(0.0, f64::max).sqrt()
}

/// `||u||_{L^2_t L^2_x}` over the sampled period.
pub fn l2_l2(traj: &SampledTrajectory) -> f64 {
    let s: f64 = traj.series.values().flat_map(|v| v.iter().map(|c| c.norm_sqr())).sum();
    (s * traj.dt).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::random_combination;
    use crate::manifold::sobolev_norm;

    #[test]
    fn window_shape() {
        let w = WindowSpec::default();
        assert_eq!(w.eval(0.5), 1.0);
        assert_eq!(w.eval(-1.0), 1.0);
        assert_eq!(w.eval(2.5), 0.0);
        assert!((w.eval(1.5) - 0.5).abs() < 1e-15);
        assert!(WindowSpec { inner: 1.0, outer: 5.0 }.validate().is_err());
    }

    #[test]
    fn l2_window_norm_matches_time_integral() {
        let w = WindowSpec::default();
        let rule = gauss_rule(16).unwrap();
        let (x, wt) = rule.composite(-2.0, 2.0, 64);
        let direct: f64 = x.iter().zip(&wt).map(|(t, q)| q * w.eval(*t).powi(2)).sum();
        assert!((w.hb_norm(0.0).powi(2) - direct).abs() < 1e-8);
    }

    #[test]
    fn zero_trajectory() {
        let t = SampledTrajectory::zero(Manifold::S3, 64);
        assert_eq!(xsb_norm(&t, 1.0, 0.6).unwrap(), 0.0);
    }

    #[test]
    fn free_solution_identity() {
        let u0 = random_combination(Manifold::S3, &Manifold::S3.modes_up_to(4), 9).unwrap();
        let w = WindowSpec::default();
        let traj = windowed_free_trajectory(&u0, &w, 4096).unwrap();
        for (s, b) in [(0.0, 0.6), (1.0, 0.75)] {
            let lhs = xsb_norm(&traj, s, b).unwrap();
            let rhs = w.hb_norm(b) * sobolev_norm(&u0, s);
            assert!((lhs - rhs).abs() < 1e-3 * rhs, "{lhs} {rhs}");
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let u0 = random_combination(Manifold::S3, &Manifold::S3.modes_up_to(6), 2).unwrap();
        let traj = windowed_free_trajectory(&u0, &WindowSpec::default(), 1024).unwrap();
        let p = time_freq_project(&traj, 2.0, 1.0).unwrap();
        let pp = time_freq_project(&p, 2.0, 1.0).unwrap();
        for (m, v) in &p.series {
            for (a, b) in v.iter().zip(&pp.series[m]) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        assert!(l2_l2(&p) > 0.0);
    }

    #[test]
    fn aliasing_is_reported() {
        let f = SpectralField::single(Manifold::S3, Mode::S3 { p: 40, m1: 0, m2: 0 }).unwrap();
        let traj = windowed_free_trajectory(&f, &WindowSpec::default(), 256).unwrap();
        assert!(matches!(xsb_norm(&traj, 0.0, 0.6), Err(Error::Precision(_))));
    }
}
