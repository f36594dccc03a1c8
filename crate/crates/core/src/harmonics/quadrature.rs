use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> u32 {
        2 * self.nodes.len() as u32 - 1
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Composite rule on `[a, b]` split into `panels` equal pieces.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

/// Gauss–Legendre nodes (increasing) and weights by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_rule(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::Parameter("Gauss rule needs at least one node".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(GaussRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule for the weight `sqrt(1 - x^2)` (second-kind Chebyshev).
///
/// Nodes `cos(j pi / (n + 1))`, `j = 1..=n`, returned in increasing order.
pub fn chebyshev_u_rule(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::Parameter("Gauss rule needs at least one node".into()));
    }
    let h = PI / (n as f64 + 1.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for j in (1..=n).rev() {
        let th = j as f64 * h;
        nodes.push(th.cos());
        weights.push(h * th.sin().powi(2));
    }
    Ok(GaussRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_and_two_point_rules() {
        let r1 = gauss_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);
        let r2 = gauss_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes[0] + s).abs() < 1e-15 && (r2.nodes[1] - s).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15);
        assert!((r2.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exactness_degree() {
        let r3 = gauss_rule(3).unwrap();
        assert!((r3.integrate(|x| x.powi(4)) - 0.4).abs() < 1e-15);
        assert!(gauss_rule(0).is_err());
        for n in [5usize, 17, 64, 301, 1025] {
            let r = gauss_rule(n).unwrap();
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-12, "n={n}: {total}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            let deg = (2 * n - 2) as i32;
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!((r.integrate(|x| x.powi(deg)) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_rule_integrates_semicircle_moments() {
        let r = chebyshev_u_rule(6).unwrap();
        assert!((r.integrate(|_| 1.0) - PI / 2.0).abs() < 1e-14);
        assert!((r.integrate(|x| x * x) - PI / 8.0).abs() < 1e-14);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
