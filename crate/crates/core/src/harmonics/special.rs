//! Classical orthogonal polynomials by forward three-term recurrence.
//!
//! Two flavours live here. [`special_eval`] returns the textbook (raw)
//! normalisation of each family. The `*_column` helpers return whole columns
//! of orthonormalised values in a single sweep; they are what the basis
//! constructors use, because the raw families overflow long before degree
//! 512 once the order grows.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Which classical family, together with its real parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `P_l^m` with the Condon–Shortley phase; the degree is `l`.
    AssociatedLegendre { order: i32 },
    /// `C_n^{(weight)}`, orthogonal for `(1 - x^2)^(weight - 1/2)`.
    Gegenbauer { weight: f64 },
    /// `P_n^{(alpha, beta)}`, orthogonal for `(1 - x)^alpha (1 + x)^beta`.
    Jacobi { alpha: f64, beta: f64 },
    ChebyshevU,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialFamily {
    pub family: Family,
    pub degree: u32,
}

impl PolynomialFamily {
    pub fn new(family: Family, degree: u32) -> Result<Self> {
        let fam = PolynomialFamily { family, degree };
        fam.validate()?;
        Ok(fam)
    }

    fn validate(&self) -> Result<()> {
        match self.family {
            Family::AssociatedLegendre { order } => {
                if order.unsigned_abs() > self.degree {
                    return Err(Error::Parameter(format!(
                        "associated Legendre order {order} exceeds degree {}",
                        self.degree
                    )));
                }
            }
            Family::Gegenbauer { weight } => {
                if !(weight > -0.5) || weight == 0.0 || !weight.is_finite() {
                    return Err(Error::Parameter(format!(
                        "Gegenbauer weight must be > -1/2 and nonzero, got {weight}"
                    )));
                }
            }
            Family::Jacobi { alpha, beta } => {
                if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
                    return Err(Error::Parameter(format!(
                        "Jacobi parameters must exceed -1, got ({alpha}, {beta})"
                    )));
                }
            }
            Family::ChebyshevU => {}
        }
        Ok(())
    }
}

/// Evaluates a classical polynomial at `x` in `[-1, 1]`.
pub fn special_eval(family: &PolynomialFamily, x: f64) -> Result<f64> {
    family.validate()?;
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    let n = family.degree as usize;
    let value = match family.family {
        Family::ChebyshevU => chebyshev_u(n, x),
        Family::Gegenbauer { weight } => gegenbauer(n, weight, x),
        Family::Jacobi { alpha, beta } => jacobi(n, alpha, beta, x),
        Family::AssociatedLegendre { order } => {
            let l = family.degree;
            let m = order.unsigned_abs();
            let normalized = legendre_normalized_column(m, l, x)[(l - m) as usize];
            // P_l^m = sqrt(4 pi (l+m)! / ((2l+1)(l-m)!)) * normalized
            let ln_scale = 0.5
                * ((4.0 * PI).ln() + ln_factorial(l + m)
                    - ((2 * l + 1) as f64).ln()
                    - ln_factorial(l - m));
            let positive = normalized * ln_scale.exp();
            if order >= 0 {
                positive
            } else {
                // P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * (ln_factorial(l - m) - ln_factorial(l + m)).exp() * positive
            }
        }
    };
    Ok(value)
}

fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn gegenbauer(n: usize, lambda: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * lambda * x);
    for k in 2..=n {
        let k = k as f64;
        let next = (2.0 * x * (k + lambda - 1.0) * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 1..n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let lead = 2.0 * (k + 1.0) * (k + a + b + 1.0) * s;
        let mid = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
        let back = 2.0 * (k + a) * (k + b) * (s + 2.0);
        let next = (mid * cur - back * prev) / lead;
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Orthonormal associated Legendre values `Pbar_n^m(x)` for `n = m..=n_max`.
///
/// Normalised so that `Pbar_n^m(cos theta) e^{i m phi}` is the unit-norm
/// spherical harmonic `Y_n^m` on the unit sphere (Condon–Shortley phase
/// included). `m >= 0`.
pub(crate) fn legendre_normalized_column(m: u32, n_max: u32, x: f64) -> Vec<f64> {
    if n_max < m {
        return Vec::new();
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=m {
        let i = i as f64;
        pmm *= -((2.0 * i + 1.0) / (2.0 * i)).sqrt() * s;
    }
    let mut out = Vec::with_capacity((n_max - m + 1) as usize);
    out.push(pmm);
    if n_max == m {
        return out;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = x * (2.0 * mf + 3.0).sqrt() * pmm;
    out.push(cur);
    for n in (m + 2)..=n_max {
        let nf = n as f64;
        let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
        let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Orthonormal Jacobi values for the weight `((1-x)/2)^a ((1+x)/2)^b`,
/// degrees `0..=j_max`, integer `a, b >= 0`.
///
/// `int_{-1}^{1} q_j q_k ((1-x)/2)^a ((1+x)/2)^b dx = delta_{jk}`.
pub(crate) fn jacobi_orthonormal_column(a: u32, b: u32, j_max: u32, x: f64) -> Vec<f64> {
    let (af, bf) = (a as f64, b as f64);
    // h_0 = 2 / ((a+b+1) C(a+b, a)) for the half-scaled weight.
    let ln_h0 = (2.0f64).ln() - (af + bf + 1.0).ln() - ln_binomial(a + b, a);
    let mut out = Vec::with_capacity(j_max as usize + 1);
    let q0 = (-0.5 * ln_h0).exp();
    out.push(q0);
    if j_max == 0 {
        return out;
    }
    // Raw recurrence coefficients rescaled by sqrt(h_n / h_{n+1}).
    let ratio = |n: f64| -> f64 {
        // h_{n+1} / h_n
        (2.0 * n + af + bf + 1.0) / (2.0 * n + af + bf + 3.0) * (n + af + 1.0) * (n + bf + 1.0)
            / ((n + af + bf + 1.0) * (n + 1.0))
    };
    let p1 = (af + 1.0) + (af + bf + 2.0) * (x - 1.0) / 2.0;
    let mut prev = q0;
    let mut cur = p1 * q0 / ratio(0.0).sqrt();
    out.push(cur);
    for k in 1..j_max {
        let n = k as f64;
        let s = 2.0 * n + af + bf;
        let lead = 2.0 * (n + 1.0) * (n + af + bf + 1.0) * s;
        let mid = (s + 1.0) * ((s + 2.0) * s * x + af * af - bf * bf) / lead;
        let back = 2.0 * (n + af) * (n + bf) * (s + 2.0) / lead;
        let r_next = ratio(n);
        let r_prev = ratio(n - 1.0);
        let next = mid * cur / r_next.sqrt() - back * prev / (r_next * r_prev).sqrt();
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

pub(crate) fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Zonal Gegenbauer family on `S^d`, orthonormal on the sphere.
///
/// Returns `Z_p(x)` for `p = 0..=p_max` with `x = cos(theta)`, normalised so
/// that `int_{S^d} Z_p^2 = 1` (surface measure). Supports `d` in 2..=4.
pub(crate) fn zonal_column(dim: u32, p_max: u32, x: f64) -> Vec<f64> {
    let lambda = (dim as f64 - 1.0) / 2.0;
    let mut raw = Vec::with_capacity(p_max as usize + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    raw.push(1.0);
    for k in 1..=p_max {
        let kf = k as f64;
        let next = if k == 1 {
            2.0 * lambda * x
        } else {
            (2.0 * x * (kf + lambda - 1.0) * cur - (kf + 2.0 * lambda - 2.0) * prev) / kf
        };
        prev = cur;
        cur = next;
        raw.push(cur);
    }
    raw.iter()
        .enumerate()
        .map(|(p, v)| v / zonal_raw_norm(dim, p as u32))
        .collect()
}

/// Surface-measure L2 norm of the raw Gegenbauer zonal `C_p^{(d-1)/2}(cos theta)`.
pub(crate) fn zonal_raw_norm(dim: u32, p: u32) -> f64 {
    let pf = p as f64;
    let sq = match dim {
        // 2 pi * 2/(2p+1)
        2 => 4.0 * PI / (2.0 * pf + 1.0),
        // 4 pi * pi/2
        3 => 2.0 * PI * PI,
        // 2 pi^2 * (p+1)(p+2)/(p+3/2)
        4 => 2.0 * PI * PI * (pf + 1.0) * (pf + 2.0) / (pf + 1.5),
        _ => f64::NAN,
    };
    sq.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn chebyshev_low_degrees() {
        let u0 = PolynomialFamily::new(Family::ChebyshevU, 0).unwrap();
        assert_eq!(special_eval(&u0, 0.3).unwrap(), 1.0);
        let u2 = PolynomialFamily::new(Family::ChebyshevU, 2).unwrap();
        assert!(special_eval(&u2, 0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn associated_legendre_condon_shortley() {
        let p11 = PolynomialFamily::new(Family::AssociatedLegendre { order: 1 }, 1).unwrap();
        assert!(close(special_eval(&p11, 0.0).unwrap(), -1.0, 1e-14));
        // P_2^1(x) = -3x sqrt(1-x^2)
        let p21 = PolynomialFamily::new(Family::AssociatedLegendre { order: 1 }, 2).unwrap();
        let x: f64 = 0.3;
        assert!(close(special_eval(&p21, x).unwrap(), -3.0 * x * (1.0 - x * x).sqrt(), 1e-13));
        // P_2^{-1} = -(1/6) P_2^1
        let p2m1 = PolynomialFamily::new(Family::AssociatedLegendre { order: -1 }, 2).unwrap();
        assert!(close(
            special_eval(&p2m1, x).unwrap(),
            -special_eval(&p21, x).unwrap() / 6.0,
            1e-13
        ));
    }

    #[test]
    fn parameter_domain_errors() {
        assert!(PolynomialFamily::new(Family::Gegenbauer { weight: -0.7 }, 3).is_err());
        assert!(PolynomialFamily::new(Family::Jacobi { alpha: -1.0, beta: 0.0 }, 3).is_err());
        assert!(PolynomialFamily::new(Family::AssociatedLegendre { order: 4 }, 3).is_err());
        let u = PolynomialFamily::new(Family::ChebyshevU, 3).unwrap();
        assert!(matches!(special_eval(&u, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn jacobi_matches_gegenbauer_relation() {
        // C_n^{1}(x) = U_n(x) and Jacobi(1/2,1/2) is proportional to U_n.
        let x = 0.37;
        for n in 0..10u32 {
            let g = gegenbauer(n as usize, 1.0, x);
            let u = chebyshev_u(n as usize, x);
            assert!(close(g, u, 1e-13));
        }
    }

    #[test]
    fn orthonormal_columns_integrate_to_identity() {
        let rule = crate::harmonics::gauss_rule(40).unwrap();
        let (a, b) = (3u32, 5u32);
        let cols: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|&x| {
                let w = ((1.0 - x) / 2.0).powi(a as i32) * ((1.0 + x) / 2.0).powi(b as i32);
                jacobi_orthonormal_column(a, b, 12, x).into_iter().map(|q| q * w.sqrt()).collect()
            })
            .collect();
        for j in 0..=12 {
            for k in 0..=12 {
                let s: f64 = rule.weights.iter().zip(&cols).map(|(w, c)| w * c[j] * c[k]).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12, "({j},{k}) -> {s}");
            }
        }
    }
}
