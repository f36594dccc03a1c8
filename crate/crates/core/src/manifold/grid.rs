use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Manifold, Point};
use crate::error::{Error, Result};
use crate::harmonics::{chebyshev_u_rule, gauss_rule};

/// Product quadrature: a polar rule times uniform periodic rules in each
/// azimuthal angle.
///
/// Nodes are ordered polar-major, then first angle, then second angle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    manifold: Manifold,
    polar: Vec<f64>,
    polar_weights: Vec<f64>,
    azimuth: [usize; 2],
    exactness: u32,
    reduced: bool,
}

/// Builds a rule integrating every polynomial integrand of total degree at
/// most `max_degree` exactly.
pub fn build_grid(manifold: Manifold, max_degree: u32) -> Result<QuadratureGrid> {
    QuadratureGrid::build(manifold, max_degree, false)
}

/// Same polar rule with a single azimuthal node per angle.
///
/// Exact only for integrands that do not depend on the azimuthal angles, such
/// as `|f|^2` for `f` with a single torus signature.
pub fn build_reduced_grid(manifold: Manifold, max_degree: u32) -> Result<QuadratureGrid> {
    QuadratureGrid::build(manifold, max_degree, true)
}

impl QuadratureGrid {
    fn build(manifold: Manifold, max_degree: u32, reduced: bool) -> Result<QuadratureGrid> {
        manifold.validate()?;
        let d = max_degree as usize;
        let (rule, scale, exactness) = match manifold {
            Manifold::S2 { rho } | Manifold::S2xS1 { rho } => {
                let n = d / 2 + 1;
                (gauss_rule(n)?, rho * rho, 2 * n as u32 - 1)
            }
            Manifold::S3 => {
                let n = d / 4 + 1;
                (gauss_rule(n)?, 0.25, 4 * n as u32 - 2)
            }
            Manifold::Zonal { dim: 2 } => {
                let n = d / 2 + 1;
                (gauss_rule(n)?, 2.0 * PI, 2 * n as u32 - 1)
            }
            Manifold::Zonal { dim: 3 } => {
                let n = d / 2 + 1;
                (chebyshev_u_rule(n)?, 4.0 * PI, 2 * n as u32 - 1)
            }
            Manifold::Zonal { .. } => {
                let n = d / 2 + 2;
                let mut rule = gauss_rule(n)?;
                for (w, x) in rule.weights.iter_mut().zip(&rule.nodes) {
                    *w *= 1.0 - x * x;
                }
                (rule, 2.0 * PI * PI, 2 * n as u32 - 3)
            }
        };
        let axes = manifold.azimuth_axes();
        let per_axis = if reduced { 1 } else { d + 1 };
        let mut azimuth = [1usize; 2];
        for a in azimuth.iter_mut().take(axes) {
            *a = per_axis;
        }
        let polar_weights = rule.weights.iter().map(|w| w * scale).collect();
        Ok(QuadratureGrid {
            manifold,
            polar: rule.nodes,
            polar_weights,
            azimuth,
            exactness,
            reduced: reduced && axes > 0,
        })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    /// Highest total polynomial degree integrated exactly (for a reduced grid,
    /// among azimuth-independent integrands).
    pub fn exactness(&self) -> u32 {
        let axes = self.manifold.azimuth_axes();
        if axes == 0 || self.reduced {
            return self.exactness;
        }
        self.azimuth[..axes]
            .iter()
            .map(|&n| n as u32 - 1)
            .fold(self.exactness, u32::min)
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn len(&self) -> usize {
        self.polar.len() * self.azimuth[0] * self.azimuth[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn polar_nodes(&self) -> &[f64] {
        &self.polar
    }

    pub(crate) fn azimuth_counts(&self) -> [usize; 2] {
        self.azimuth
    }

    /// Weight of every node on the polar ring `ix`.
    pub fn ring_weight(&self, ix: usize) -> f64 {
        let axes = self.manifold.azimuth_axes();
        let mut w = self.polar_weights[ix];
        for a in 0..axes {
            w *= 2.0 * PI / self.azimuth[a] as f64;
        }
        w
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.ring_weight(i / (self.azimuth[0] * self.azimuth[1]))
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn point(&self, i: usize) -> Point {
        let per_ring = self.azimuth[0] * self.azimuth[1];
        let ix = i / per_ring;
        let a0 = (i % per_ring) / self.azimuth[1];
        let a1 = i % self.azimuth[1];
        let x = self.polar[ix];
        let ang0 = 2.0 * PI * a0 as f64 / self.azimuth[0] as f64;
        let ang1 = 2.0 * PI * a1 as f64 / self.azimuth[1] as f64;
        match self.manifold {
            Manifold::S2 { .. } => Point::S2 { x, phi: ang0 },
            Manifold::S3 => Point::S3 { x, phi1: ang0, phi2: ang1 },
            Manifold::S2xS1 { .. } => Point::S2xS1 { x, phi: ang0, psi: ang1 },
            Manifold::Zonal { .. } => Point::Zonal { x },
        }
    }

    /// Quadrature of a function of the point.
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * f(self.point(i))).sum()
    }
}

/// Complex samples on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<'g> {
    grid: &'g QuadratureGrid,
    values: Vec<Complex64>,
}

impl<'g> GridFunction<'g> {
    pub fn new(grid: &'g QuadratureGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: &'g QuadratureGrid) -> Self {
        GridFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: &'g QuadratureGrid, f: impl Fn(Point) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &'g QuadratureGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction<'_>) -> Result<GridFunction<'g>> {
        if self.grid != other.grid {
            return Err(Error::Mismatch("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// `int |f|^2` by quadrature.
    pub fn norm_sqr(&self) -> f64 {
        let per_ring = self.grid.azimuth[0] * self.grid.azimuth[1];
        self.values
            .chunks(per_ring)
            .enumerate()
            .map(|(ix, ring)| self.grid.ring_weight(ix) * ring.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }
}

/// Discrete `L^p` norm; `p = f64::INFINITY` gives the maximum modulus.
pub fn lp_norm(values: &GridFunction<'_>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("L^p exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if p == 2.0 {
        return Ok(values.norm_sqr().sqrt());
    }
    let grid = values.grid;
    let sum: f64 = values
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * v.norm().powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}
