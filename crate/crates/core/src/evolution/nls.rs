use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::collocation::ZonalCollocation;
use super::{Nonlinearity, NonlinearityKind};
use crate::error::{Error, Result};
use crate::manifold::{analyze, build_grid, synthesize, GridFunction, Manifold, Mode, QuadratureGrid, SpectralField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Apply the Laplacian substep.
    pub linear: bool,
    /// Apply the nonlinear substep.
    pub nonlinear: bool,
    /// Number of stored states, including `t = 0` and `t = T`.
    pub samples: usize,
    /// Zonal `S^3` only: collocation nodes per retained mode of the data.
    pub oversample: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { linear: true, nonlinear: true, samples: 11, oversample: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    /// Step actually used (`T / steps`).
    pub dt: f64,
    pub scheme: String,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &SpectralField)> {
        self.times.last().copied().zip(self.fields.last())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    /// `max_t |M(t) - M(0)| / M(0)` with `M = ||u||_{L^2}`.
    pub mass_drift: f64,
    /// `max_t |E(t) - E(0)| / |E(0)|`.
    pub energy_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SolverStatus {
    Completed,
    /// Non-finite or overflowing state; `last_time` is the last valid time.
    BlowUp { last_time: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlsRun {
    pub trajectory: Trajectory,
    pub conservation: ConservationReport,
    pub status: SolverStatus,
    /// The grid does not integrate the nonlinearity exactly.
    pub aliased: bool,
}

enum Engine {
    Collocation(ZonalCollocation),
    Grid { grid: QuadratureGrid, modes: Vec<Mode>, degree: u32 },
}

struct State {
    engine: Engine,
    manifold: Manifold,
    lambda: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl State {
    fn values(&self) -> Result<Vec<Complex64>> {
        match &self.engine {
            Engine::Collocation(c) => c.synthesize(&self.coeffs),
            Engine::Grid { grid, .. } => {
                Ok(synthesize(&self.field()?, grid)?.value.into_values())
            }
        }
    }

    fn set_values(&mut self, values: Vec<Complex64>) -> Result<()> {
        self.coeffs = match &self.engine {
            Engine::Collocation(c) => c.analyze(&values)?,
            Engine::Grid { grid, modes, degree } => {
                let f = analyze(&GridFunction::new(grid, values)?, *degree)?.value;
                modes.iter().map(|m| f.get(*m)).collect()
            }
        };
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        match &self.engine {
            Engine::Collocation(c) => c.weights(),
            Engine::Grid { grid, .. } => grid.weights(),
        }
    }

    fn field(&self) -> Result<SpectralField> {
        match &self.engine {
            Engine::Collocation(c) => c.field_of(&self.coeffs),
            Engine::Grid { modes, .. } => {
                SpectralField::from_modes(self.manifold, modes.iter().copied().zip(self.coeffs.iter().copied()))
            }
        }
    }

    fn linear(&mut self, t: f64) {
        for (c, l) in self.coeffs.iter_mut().zip(&self.lambda) {
            *c *= Complex64::from_polar(1.0, -l * t);
        }
    }

    fn nonlinear(&mut self, nl: &Nonlinearity, t: f64) -> Result<()> {
        let mut v = self.values()?;
        for z in v.iter_mut() {
            *z = nl.rotate(*z, t);
        }
        self.set_values(v)
    }

    fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn energy(&self, nl: &Nonlinearity) -> Result<f64> {
        let kinetic: f64 = self.coeffs.iter().zip(&self.lambda).map(|(c, l)| l * c.norm_sqr()).sum();
        if nl.kind == NonlinearityKind::Zero {
            return Ok(kinetic);
        }
        let v = self.values()?;
        let pot: f64 = v.iter().zip(self.weights()).map(|(z, w)| w * nl.potential(*z)).sum();
        Ok(kinetic + pot)
    }

    fn finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite() && c.norm_sqr() < 1e300)
    }
}

fn build_state(field0: &SpectralField, nl: &Nonlinearity, options: &SolverOptions) -> Result<(State, bool)> {
    let manifold = *field0.manifold();
    let degree = field0.max_degree();
    if manifold == (Manifold::Zonal { dim: 3 }) {
        let m = options.oversample.max(1) * (degree as usize + 1);
        let col = ZonalCollocation::new(m)?;
        let coeffs = col.coefficients_of(field0)?;
        let lambda = col.eigenvalues();
        let aliased = !nl.is_polynomial() || options.oversample < 2;
        return Ok((State { engine: Engine::Collocation(col), manifold, lambda, coeffs }, aliased));
    }
    let factor = match nl.kind {
        NonlinearityKind::Zero => 2,
        _ if nl.is_polynomial() => nl.alpha.ceil() as u32 + 1,
        _ => 2 * (nl.alpha.ceil() as u32 + 1),
    };
    let grid = build_grid(manifold, factor * degree.max(1))?;
    let modes = manifold.modes_up_to(degree);
    let lambda = modes.iter().map(|m| manifold.mode_eigenvalue(*m)).collect::<Result<_>>()?;
    let coeffs = modes.iter().map(|m| field0.get(*m)).collect();
    let aliased = !nl.is_polynomial();
    Ok((State { engine: Engine::Grid { grid, modes, degree }, manifold, lambda, coeffs }, aliased))
}

/// Strang splitting for `i u_t + Delta u = F(u)`: half Laplacian step, exact
/// pointwise phase rotation, half Laplacian step.
///
/// On the zonal `S^3` sector the state lives in a collocation space of
/// `oversample * (deg + 1)` modes, where both substeps are exact isometries.
/// Elsewhere the nonlinear substep is projected back to the initial degree on
/// a dealiasing grid.
pub fn nls_simulate(
    field0: &SpectralField,
    t_end: f64,
    dt: f64,
    nonlinearity: &Nonlinearity,
    options: &SolverOptions,
) -> Result<NlsRun> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Parameter(format!("final time must be nonnegative, got {t_end}")));
    }
    if options.samples < 2 {
        return Err(Error::Parameter("need at least two samples".into()));
    }
    let (mut state, aliased) = build_state(field0, nonlinearity, options)?;
    let steps = ((t_end / dt).ceil() as usize).max(1);
    let h = t_end / steps as f64;
    let sample_steps: Vec<usize> = (0..options.samples)
        .map(|i| ((i as f64 * steps as f64) / (options.samples - 1) as f64).round() as usize)
        .collect();
    let energy_nl = if options.nonlinear { *nonlinearity } else { Nonlinearity::zero() };

    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut mass = Vec::new();
    let mut energy = Vec::new();
    let mut record = |state: &State, t: f64| -> Result<()> {
        times.push(t);
        fields.push(state.field()?);
        mass.push(state.mass());
        energy.push(state.energy(&energy_nl)?);
        Ok(())
    };
    record(&state, 0.0)?;
    let mut next = 1;
    let mut status = SolverStatus::Completed;
    let mut last_good = 0.0;
    for step in 1..=steps {
        if options.linear {
            state.linear(h / 2.0);
        }
        if options.nonlinear && nonlinearity.kind != NonlinearityKind::Zero {
            state.nonlinear(nonlinearity, h)?;
        }
        if options.linear {
            state.linear(h / 2.0);
        }
        let t = step as f64 * h;
        if !state.finite() {
            status = SolverStatus::BlowUp { last_time: last_good };
            break;
        }
        last_good = t;
        while next < sample_steps.len() && sample_steps[next] == step {
            record(&state, t)?;
            next += 1;
        }
    }
    let mass_drift = mass.iter().map(|m| (m - mass[0]).abs()).fold(0.0, f64::max) / mass[0].max(f64::MIN_POSITIVE);
    let e0 = energy[0].abs().max(f64::MIN_POSITIVE);
    let energy_drift = energy.iter().map(|e| (e - energy[0]).abs()).fold(0.0, f64::max) / e0;
    Ok(NlsRun {
        trajectory: Trajectory { times: times.clone(), fields, dt: h, scheme: "strang-2".into() },
        conservation: ConservationReport { times, mass, energy, mass_drift, energy_drift },
        status,
        aliased,
    })
}
