use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Checked, Error, Result};
use crate::estimates::{random_sector_field, EstimatePoint, EstimateReport};
use crate::harmonics::gauss_rule;
use crate::manifold::{
    build_grid, build_reduced_grid, dyadic_project, synthesize, DyadicMode, Manifold, QuadratureGrid, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrichartzMethod {
    /// Quadrature in time of the spatial `L^2` norm.
    TimeQuadrature,
    /// Parseval in time over one period of an integer spectrum.
    ResonanceSum,
}

/// Eigencomponents of a field sampled on the grid: `(lambda, values)`.
fn components(field: &SpectralField, grid: &QuadratureGrid) -> Result<(Vec<(f64, Vec<Complex64>)>, bool)> {
    let mut flagged = false;
    let mut out = Vec::new();
    for (idx, part) in field.eigen_components() {
        let lam = field.manifold().eigenvalue(idx)?;
        let vals = synthesize(&part, grid)?;
        flagged |= vals.under_resolved;
        out.push((lam, vals.value.into_values()));
    }
    Ok((out, flagged))
}

fn spatial_grid(fields: &[&SpectralField]) -> Result<QuadratureGrid> {
    let manifold = *fields[0].manifold();
    let degree = 2 * fields.iter().map(|f| f.max_degree()).sum::<u32>();
    let single = fields.iter().all(|f| f.signatures().len() <= 1);
    if single {
        build_reduced_grid(manifold, degree)
    } else {
        build_grid(manifold, degree)
    }
}

fn weighted_norm_sqr(grid: &QuadratureGrid, v: &[Complex64]) -> f64 {
    v.iter().enumerate().map(|(i, z)| grid.weight(i) * z.norm_sqr()).sum()
}

/// `|| prod_j e^{it Delta} u_j ||_{L^2([0, T] x M)}` for two or three factors.
///
/// The resonance sum requires an integer spectrum and `T = 2 pi`; it groups
/// products of eigencomponents by total frequency `tau` and sums
/// `2 pi ||G_tau||^2`. Time quadrature samples the product directly: the
/// trapezoid rule over one period when the spectrum is integer and `T` is a
/// multiple of `2 pi`, composite Gauss-Legendre otherwise.
pub fn strichartz_product_norm(
    fields: &[&SpectralField],
    t_end: f64,
    method: StrichartzMethod,
) -> Result<Checked<f64>> {
    if !(2..=3).contains(&fields.len()) {
        return Err(Error::Parameter(format!("need two or three factors, got {}", fields.len())));
    }
    let manifold = *fields[0].manifold();
    if fields.iter().any(|f| *f.manifold() != manifold) {
        return Err(Error::Mismatch("factors live on different manifolds".into()));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Parameter(format!("time interval must be positive, got {t_end}")));
    }
    if fields.iter().any(|f| f.is_empty()) {
        return Ok(Checked::exact(0.0));
    }
    let grid = spatial_grid(fields)?;
    let mut flagged = false;
    let mut comps = Vec::new();
    for f in fields {
        let (c, fl) = components(f, &grid)?;
        flagged |= fl;
        comps.push(c);
    }
    let value = match method {
        StrichartzMethod::ResonanceSum => {
            if !manifold.integer_spectrum() {
                return Err(Error::Parameter(format!("resonance sum needs an integer spectrum, {manifold:?} has none")));
            }
            if (t_end - 2.0 * PI).abs() > 1e-12 {
                return Err(Error::Parameter(format!("resonance sum runs over one period 2 pi, got T = {t_end}")));
            }
            resonance_sum(&grid, &comps)
        }
        StrichartzMethod::TimeQuadrature => time_quadrature(&grid, &comps, t_end, manifold.integer_spectrum())?,
    };
    Ok(Checked::flagged(value.sqrt(), flagged))
}

fn resonance_sum(grid: &QuadratureGrid, comps: &[Vec<(f64, Vec<Complex64>)>]) -> f64 {
    let mut groups: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
    let mut add = |tau: f64, prod: Vec<Complex64>| {
        let key = tau.round() as i64;
        match groups.get_mut(&key) {
            Some(acc) => acc.iter_mut().zip(prod).for_each(|(a, p)| *a += p),
            None => {
                groups.insert(key, prod);
            }
        }
    };
    for (l1, v1) in &comps[0] {
        for (l2, v2) in &comps[1] {
            let p12: Vec<Complex64> = v1.iter().zip(v2).map(|(a, b)| a * b).collect();
            if comps.len() == 2 {
                add(l1 + l2, p12);
            } else {
                for (l3, v3) in &comps[2] {
                    add(l1 + l2 + l3, p12.iter().zip(v3).map(|(a, b)| a * b).collect());
                }
            }
        }
    }
    2.0 * PI * groups.values().map(|g| weighted_norm_sqr(grid, g)).sum::<f64>()
}

fn time_quadrature(
    grid: &QuadratureGrid,
    comps: &[Vec<(f64, Vec<Complex64>)>],
    t_end: f64,
    integer: bool,
) -> Result<f64> {
    let span = |c: &Vec<(f64, Vec<Complex64>)>| {
        let lo = c.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    // Highest frequency of |prod u_j(t)|^2.
    let omega: f64 = 2.0 * comps.iter().map(span).sum::<f64>();
    let periods = t_end / (2.0 * PI);
    let (nodes, weights) = if integer && (periods - periods.round()).abs() < 1e-12 && periods.round() >= 1.0 {
        let n = omega.round() as usize + 1;
        let h = 2.0 * PI / n as f64;
        let nodes: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        (nodes, vec![h * periods.round(); n])
    } else {
        let rule = gauss_rule(16)?;
        let panels = (omega * t_end / (4.0 * PI)).ceil() as usize + 1;
        rule.composite(0.0, t_end, panels)
    };
    let mut total = 0.0;
    let mut prod = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut factor = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (t, w) in nodes.iter().zip(&weights) {
        prod.iter_mut().for_each(|p| *p = Complex64::new(1.0, 0.0));
        for c in comps {
            factor.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for (lam, vals) in c {
                let ph = Complex64::from_polar(1.0, -lam * t);
                factor.iter_mut().zip(vals).for_each(|(f, v)| *f += ph * v);
            }
            prod.iter_mut().zip(&factor).for_each(|(p, f)| *p *= f);
        }
        total += w * weighted_norm_sqr(grid, &prod);
    }
    Ok(total)
}

/// `max_trials || e^{it Delta} Delta_N f e^{it Delta} Delta_N g ||_{L^2([0, 2 pi] x S^3)}
/// / (||f|| ||g||)` against `N = min(N1, N2)`, by the resonance sum.
///
/// Trial functions are random within a single Hopf sector.
pub fn bilinear_strichartz_sweep(schedule: &[f64], trials: usize, seed: u64) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let manifold = Manifold::S3;
    let mut points = Vec::new();
    for (i, &n) in schedule.iter().enumerate() {
        let mut best = 0.0f64;
        let mut flagged = false;
        for t in 0..trials {
            let s = seed.wrapping_add((2 * (i * trials + t)) as u64);
            let f = dyadic_project(&random_sector_field(manifold, n - 1.0, 2.0 * n + 1.0, s)?, n, DyadicMode::Band)?;
            let g = dyadic_project(&random_sector_field(manifold, n - 1.0, 2.0 * n + 1.0, s + 1)?, n, DyadicMode::Band)?;
            if f.is_empty() || g.is_empty() {
                return Err(Error::Degenerate(format!("empty band at N = {n}")));
            }
            let v = strichartz_product_norm(&[&f, &g], 2.0 * PI, StrichartzMethod::ResonanceSum)?;
            flagged |= v.under_resolved;
            best = best.max(v.value / (f.l2_norm() * g.l2_norm()));
        }
        points.push(EstimatePoint { params: vec![n, n], x: n, ratio: best, model: n.sqrt(), under_resolved: flagged });
    }
    EstimateReport::assemble("bilinear-strichartz", manifold, vec!["random-sector".into()], &["N1", "N2"], points, 0.5, 0, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::random_combination;
    use crate::manifold::Mode;

    #[test]
    fn constant_modes_closed_form() {
        let one = SpectralField::single(Manifold::S3, Mode::S3 { p: 0, m1: 0, m2: 0 }).unwrap();
        let expect = (2.0 * PI).sqrt() / (2.0 * PI * PI).sqrt();
        for m in [StrichartzMethod::ResonanceSum, StrichartzMethod::TimeQuadrature] {
            let v = strichartz_product_norm(&[&one, &one], 2.0 * PI, m).unwrap();
            assert!((v.value - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn methods_agree_small() {
        let modes: Vec<Mode> = Manifold::S3.modes_up_to(4);
        let f = random_combination(Manifold::S3, &modes, 1).unwrap();
        let g = random_combination(Manifold::S3, &modes, 2).unwrap();
        let a = strichartz_product_norm(&[&f, &g], 2.0 * PI, StrichartzMethod::ResonanceSum).unwrap();
        let b = strichartz_product_norm(&[&f, &g], 2.0 * PI, StrichartzMethod::TimeQuadrature).unwrap();
        assert!(!a.under_resolved && !b.under_resolved);
        assert!((a.value - b.value).abs() < 1e-10 * a.value);
        let c = strichartz_product_norm(&[&f, &g, &f], 2.0 * PI, StrichartzMethod::ResonanceSum).unwrap();
        let d = strichartz_product_norm(&[&f, &g, &f], 2.0 * PI, StrichartzMethod::TimeQuadrature).unwrap();
        assert!((c.value - d.value).abs() < 1e-10 * c.value);
    }

    #[test]
    fn resonance_sum_rejects_bad_setups() {
        let m = Manifold::S2xS1 { rho: 1.3 };
        let f = SpectralField::single(m, Mode::S2xS1 { m: 1, n: 1, order: 0 }).unwrap();
        assert!(strichartz_product_norm(&[&f, &f], 2.0 * PI, StrichartzMethod::ResonanceSum).is_err());
        let one = SpectralField::single(Manifold::S3, Mode::S3 { p: 0, m1: 0, m2: 0 }).unwrap();
        assert!(strichartz_product_norm(&[&one, &one], 1.0, StrichartzMethod::ResonanceSum).is_err());
        assert!(strichartz_product_norm(&[&one], 2.0 * PI, StrichartzMethod::ResonanceSum).is_err());
    }

    #[test]
    fn single_pair_scales_with_sqrt_time() {
        let m = Manifold::S2xS1 { rho: 1.3 };
        let f = SpectralField::single(m, Mode::S2xS1 { m: 1, n: 2, order: 1 }).unwrap();
        let g = SpectralField::single(m, Mode::S2xS1 { m: -2, n: 1, order: 0 }).unwrap();
        let grid = build_grid(m, 8).unwrap();
        let spatial = crate::estimates::multilinear_l2(&[&f, &g], &grid).unwrap().value;
        let v = strichartz_product_norm(&[&f, &g], 1.7, StrichartzMethod::TimeQuadrature).unwrap();
        assert!((v.value - 1.7f64.sqrt() * spatial).abs() < 1e-12);
    }
}
