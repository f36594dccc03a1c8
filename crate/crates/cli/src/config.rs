//! Run configuration files.
//!
//! A config is TOML with a top-level `experiment` tag and one section named
//! after it:
//!
//! ```toml
//! experiment = "optimality"
//! seed = 3
//!
//! [optimality]
//! d = 2
//! family = "highest-weight"
//! schedule = [8, 16, 32, 64, 128, 256]
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use multispec::estimates::{OptimalityFamily, SpectralWindow};
use multispec::lattice::Kappa;
use multispec::manifold::Manifold;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Optimality,
    Projector,
    Strichartz,
    Lattice,
    Nls,
    Xsb,
    Inflation,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Optimality => "optimality",
            Experiment::Projector => "projector",
            Experiment::Strichartz => "strichartz",
            Experiment::Lattice => "lattice",
            Experiment::Nls => "nls",
            Experiment::Xsb => "xsb",
            Experiment::Inflation => "inflation",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimality: Option<OptimalityParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projector: Option<ProjectorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strichartz: Option<StrichartzParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nls: Option<NlsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xsb: Option<XsbParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<InflationParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalityParams {
    pub d: u32,
    pub family: OptimalityFamily,
    #[serde(default = "two")]
    pub arity: u32,
    pub schedule: Vec<u32>,
    pub multiplier: Option<u32>,
    pub fixed_degree: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorParams {
    pub manifold: Manifold,
    pub window: SpectralWindow,
    pub centers: Vec<f64>,
    #[serde(default = "four")]
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzParams {
    /// Dyadic band sizes `N`.
    pub schedule: Vec<f64>,
    #[serde(default = "four")]
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "counter", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LatticeParams {
    GaussRep { schedule: Vec<u64>, tau_max: u64 },
    Alpha { schedule: Vec<u64> },
    Lambda { schedule: Vec<u64>, kappa: Kappa },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityChoice {
    PurePower,
    SmoothPower,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsParams {
    pub manifold: Manifold,
    pub degree: u32,
    /// Initial coefficients are random, scaled by `amplitude * exp(-p / decay)`.
    #[serde(default = "one")]
    pub amplitude: f64,
    pub decay: Option<f64>,
    pub nonlinearity: NonlinearityChoice,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "eleven")]
    pub samples: usize,
    #[serde(default = "two_usize")]
    pub oversample: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XsbParams {
    pub manifold: Manifold,
    pub degree: u32,
    /// `(s, b)` pairs.
    pub pairs: Vec<[f64; 2]>,
    #[serde(default = "samples_default")]
    pub samples: usize,
    #[serde(default = "one")]
    pub inner: f64,
    #[serde(default = "two_f64")]
    pub outer: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationParams {
    pub alpha: f64,
    pub delta: f64,
    pub schedule: Vec<u32>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "two_usize")]
    pub oversample: usize,
    #[serde(default = "cfl_default")]
    pub cfl: f64,
    #[serde(default = "five")]
    pub samples: usize,
    /// Scaled times `t n^{(alpha-1)/2}` for the gradient check.
    #[serde(default = "scaled_default")]
    pub scaled_times: Vec<f64>,
}

fn one() -> f64 {
    1.0
}
fn two() -> u32 {
    2
}
fn two_usize() -> usize {
    2
}
fn two_f64() -> f64 {
    2.0
}
fn four() -> usize {
    4
}
fn five() -> usize {
    5
}
fn eleven() -> usize {
    11
}
fn samples_default() -> usize {
    4096
}
fn cfl_default() -> f64 {
    0.1
}
fn scaled_default() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn increasing<T: PartialOrd>(v: &[T], what: &str) -> Result<(), CliError> {
    if v.is_empty() || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(format!("{what} must be non-empty and strictly increasing")));
    }
    Ok(())
}

fn positive(x: f64, what: &str) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{what} must be positive, got {x}")))
    }
}

fn manifold(m: &Manifold) -> Result<(), CliError> {
    m.validate().map_err(|e| bad(e.to_string()))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn sections(&self) -> Vec<Experiment> {
        let mut v = Vec::new();
        if self.optimality.is_some() {
            v.push(Experiment::Optimality);
        }
        if self.projector.is_some() {
            v.push(Experiment::Projector);
        }
        if self.strichartz.is_some() {
            v.push(Experiment::Strichartz);
        }
        if self.lattice.is_some() {
            v.push(Experiment::Lattice);
        }
        if self.nls.is_some() {
            v.push(Experiment::Nls);
        }
        if self.xsb.is_some() {
            v.push(Experiment::Xsb);
        }
        if self.inflation.is_some() {
            v.push(Experiment::Inflation);
        }
        v
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), CliError> {
        let sections = self.sections();
        if sections != [self.experiment] {
            return Err(bad(format!(
                "experiment `{}` needs exactly one [{}] section, found {:?}",
                self.experiment, self.experiment, sections
            )));
        }
        if let Some(p) = &self.optimality {
            increasing(&p.schedule, "schedule")?;
            if !(2..=4).contains(&p.d) || !(p.arity == 2 || p.arity == 3) || p.schedule[0] == 0 {
                return Err(bad("optimality needs d in 2..=4, arity 2 or 3 and positive degrees"));
            }
            // The two smallest degrees are left out of the fit.
            if p.schedule.len() < 5 {
                return Err(bad("optimality needs at least five degrees"));
            }
        }
        if let Some(p) = &self.projector {
            manifold(&p.manifold)?;
            increasing(&p.centers, "centers")?;
            if p.centers[0] < 1.0 || p.trials == 0 {
                return Err(bad("projector centres must be >= 1 with at least one trial"));
            }
            let w = match p.window {
                SpectralWindow::Gaussian { width } | SpectralWindow::Bump { width } => width,
            };
            positive(w, "window width")?;
        }
        if let Some(p) = &self.strichartz {
            increasing(&p.schedule, "schedule")?;
            if p.schedule.len() < 3 || p.trials == 0 {
                return Err(bad("strichartz needs at least three band sizes and one trial"));
            }
            for n in &p.schedule {
                multispec::manifold::validate_dyadic(*n).map_err(|e| bad(e.to_string()))?;
            }
        }
        if let Some(p) = &self.lattice {
            let schedule = match p {
                LatticeParams::GaussRep { schedule, .. } | LatticeParams::Alpha { schedule } => schedule,
                LatticeParams::Lambda { schedule, kappa } => {
                    positive(kappa.value(), "kappa")?;
                    schedule
                }
            };
            increasing(schedule, "schedule")?;
        }
        if let Some(p) = &self.nls {
            manifold(&p.manifold)?;
            positive(p.t_end, "t_end")?;
            positive(p.dt, "dt")?;
            positive(p.amplitude, "amplitude")?;
            if let Some(d) = p.decay {
                positive(d, "decay")?;
            }
            if !(p.alpha > 1.0) || p.samples < 2 || p.oversample == 0 {
                return Err(bad("nls needs alpha > 1, samples >= 2, oversample >= 1"));
            }
        }
        if let Some(p) = &self.xsb {
            manifold(&p.manifold)?;
            if p.pairs.len() < 3 || p.samples < 16 || !p.samples.is_power_of_two() {
                return Err(bad("xsb needs three (s, b) pairs and a power-of-two sample count >= 16"));
            }
            multispec::evolution::WindowSpec { inner: p.inner, outer: p.outer }
                .validate()
                .map_err(|e| bad(e.to_string()))?;
        }
        if let Some(p) = &self.inflation {
            increasing(&p.schedule, "schedule")?;
            self.inflation_config()
                .expect("section present")
                .validate()
                .map_err(|e| bad(e.to_string()))?;
            increasing(&p.scaled_times, "scaled_times")?;
            if p.scaled_times.len() < 2 || p.scaled_times[0] < 0.0 {
                return Err(bad("scaled_times need two nonnegative entries"));
            }
        }
        Ok(())
    }

    pub fn inflation_config(&self) -> Option<multispec::illposedness::InflationConfig> {
        self.inflation.as_ref().map(|p| {
            let mut c = multispec::illposedness::InflationConfig::new(p.alpha, p.delta, p.schedule.clone());
            c.profile.amplitude = p.amplitude;
            c.oversample = p.oversample;
            c.cfl = p.cfl;
            c.samples = p.samples;
            c
        })
    }
}
