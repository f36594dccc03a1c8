//! Exact lattice-point counts behind the bilinear and trilinear Strichartz
//! bounds.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Checked, Error, Result};
use crate::estimates::{exponent_fit, ExponentFit};

/// `#{(k1, k2) : N <= k1 < 2N, k2 >= 0, k1^2 + k2^2 = tau}`.
pub fn gauss_rep_count(tau: u64, n: u64) -> u64 {
    (n..2 * n)
        .take_while(|&k1| k1.saturating_mul(k1) <= tau)
        .filter(|&k1| {
            let rest = tau - k1 * k1;
            let k2 = rest.isqrt();
            k2 * k2 == rest
        })
        .count() as u64
}

/// Largest `gauss_rep_count(tau, n)` over `tau <= tau_max`, and the smallest
/// `tau` attaining it.
pub fn gauss_rep_max(n: u64, tau_max: u64) -> (u64, u64) {
    let mut hist = vec![0u32; tau_max as usize + 1];
    for k1 in n..2 * n {
        let base = k1 * k1;
        if base > tau_max {
            break;
        }
        let mut k2 = 0u64;
        while base + k2 * k2 <= tau_max {
            hist[(base + k2 * k2) as usize] += 1;
            k2 += 1;
        }
    }
    argmax(&hist)
}

fn argmax(hist: &[u32]) -> (u64, u64) {
    let mut best = (0u64, 0u64);
    for (t, &c) in hist.iter().enumerate() {
        if c as u64 > best.0 {
            best = (c as u64, t as u64);
        }
    }
    best
}

fn check_dyadic(n: u64) -> Result<()> {
    if n >= 1 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{n} is not a dyadic integer >= 1"
        )))
    }
}

/// `N <= <k^2 - 1>^{1/2} < 2N`, in exact integer arithmetic.
pub fn s3_band_contains(k: u64, n: u64) -> bool {
    if k == 0 {
        return false;
    }
    let lam = (k * k - 1) as u128;
    let j = 1 + lam * lam;
    let n4 = (n as u128).pow(4);
    n4 <= j && j < 16 * n4
}

fn s3_band(n: u64) -> Vec<u64> {
    (1..=2 * n + 1)
        .filter(|&k| s3_band_contains(k, n))
        .collect()
}

/// `#{(k1, k2) : k_j >= 1, k1^2 + k2^2 = tau + 2, k_j in band N_j}`.
pub fn alpha_count(n1: u64, n2: u64, tau: i64) -> Result<u64> {
    check_dyadic(n1)?;
    check_dyadic(n2)?;
    let target = tau + 2;
    if target < 2 {
        return Ok(0);
    }
    let target = target as u64;
    Ok(s3_band(n1)
        .into_iter()
        .filter(|&k1| {
            if k1 * k1 >= target {
                return false;
            }
            let rest = target - k1 * k1;
            let k2 = rest.isqrt();
            k2 * k2 == rest && s3_band_contains(k2, n2)
        })
        .count() as u64)
}

/// `sup_tau alpha_count(n1, n2, tau)` and the smallest maximiser.
pub fn alpha_sup(n1: u64, n2: u64) -> Result<(u64, i64)> {
    check_dyadic(n1)?;
    check_dyadic(n2)?;
    let (b1, b2) = (s3_band(n1), s3_band(n2));
    let top = b1.last().map_or(0, |k| k * k) + b2.last().map_or(0, |k| k * k);
    let mut hist = vec![0u32; top as usize + 1];
    for k1 in &b1 {
        for k2 in &b2 {
            hist[(k1 * k1 + k2 * k2) as usize] += 1;
        }
    }
    let (c, t) = argmax(&hist);
    Ok((c, t as i64 - 2))
}

/// Coupling `kappa = 1 / rho^2` of `S^2_rho x S^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kappa {
    /// `num / den`, handled in exact integer arithmetic.
    Rational { num: u64, den: u64 },
    /// Floating-point value compared with a guard band of `GUARD`.
    Real { value: f64 },
}

/// Width of the floating-point guard band for real `kappa`.
pub const GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Verdict {
    In,
    Out,
    Guard,
}

impl Kappa {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Kappa::Rational { num, den } => num > 0 && den > 0,
            Kappa::Real { value } => value.is_finite() && value > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "kappa must be positive, got {self:?}"
            )))
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Kappa::Rational { num, den } => num as f64 / den as f64,
            Kappa::Real { value } => value,
        }
    }

    /// `N <= <m^2 + kappa (n^2 + n)>^{1/2} < 2N`.
    fn band(&self, m: i64, n: i64, big_n: u64) -> Verdict {
        let nn = (n * n + n) as i128;
        let mm = (m * m) as i128;
        let n4 = (big_n as i128).pow(4);
        match *self {
            Kappa::Rational { num, den } => {
                let (a, b) = (num as i128, den as i128);
                let x = b * mm + a * nn;
                let j = b * b + x * x;
                if n4 * b * b <= j && j < 16 * n4 * b * b {
                    Verdict::In
                } else {
                    Verdict::Out
                }
            }
            Kappa::Real { value } => {
                let lam = mm as f64 + value * nn as f64;
                let j = 1.0 + lam * lam;
                let (lo, hi) = (n4 as f64, 16.0 * n4 as f64);
                let tol = GUARD * hi;
                if (j - lo).abs() <= tol || (j - hi).abs() <= tol {
                    Verdict::Guard
                } else if lo < j && j < hi {
                    Verdict::In
                } else {
                    Verdict::Out
                }
            }
        }
    }

    /// `|l - sum m_j^2 - kappa sum (n_j^2 + n_j)| <= 1/2`, closed interval.
    fn resonant(&self, l: i64, msq: i64, nsum: i64) -> Verdict {
        match *self {
            Kappa::Rational { num, den } => {
                let (a, b) = (num as i128, den as i128);
                let d = 2 * (b * (l - msq) as i128 - a * nsum as i128);
                if d.abs() <= b {
                    Verdict::In
                } else {
                    Verdict::Out
                }
            }
            Kappa::Real { value } => {
                let d = ((l - msq) as f64 - value * nsum as f64).abs() - 0.5;
                if d.abs() <= GUARD {
                    Verdict::Guard
                } else if d < 0.0 {
                    Verdict::In
                } else {
                    Verdict::Out
                }
            }
        }
    }
}

/// Resonance test against `x = den * sum m_j^2 + num * sum (n_j^2 + n_j)`.
fn resonant_scaled(den: u64, l: i64, x: i64) -> Verdict {
    let b = den as i128;
    if (2 * (b * l as i128 - x as i128)).abs() <= b {
        Verdict::In
    } else {
        Verdict::Out
    }
}

/// Members `(m, n)` of the dyadic band `N` of `S^2 x S^1`, plus a guard flag.
fn product_band(kappa: &Kappa, big_n: u64) -> (Vec<(i64, i64)>, bool) {
    let bn = big_n as i64;
    let n_hi = (2.0 * big_n as f64 / kappa.value().sqrt()).ceil() as i64 + 1;
    let mut out = Vec::new();
    let mut guard = false;
    for m in -2 * bn..=2 * bn {
        for n in 0..=n_hi {
            match kappa.band(m, n, big_n) {
                Verdict::In => out.push((m, n)),
                Verdict::Guard => guard = true,
                Verdict::Out => {}
            }
        }
    }
    (out, guard)
}

fn check_bands(n1: u64, n2: u64, n3: u64) -> Result<()> {
    for n in [n1, n2, n3] {
        check_dyadic(n)?;
    }
    if !(n1 >= n2 && n2 >= n3) {
        return Err(Error::Parameter(format!(
            "need N1 >= N2 >= N3, got {n1}, {n2}, {n3}"
        )));
    }
    Ok(())
}

/// Size of `{(m_j, n_j) : |l - sum lambda_{m_j, n_j}| <= 1/2, xi = sum m_j,
/// (m_j, n_j) in band N_j}` with `m_j` integers and `n_j >= 0`.
///
/// For each `(m2, m3, n3)` the first frequency is eliminated through
/// `m1 = xi - m2 - m3` and `(n1, n2)` are enumerated from the reduced
/// inequality `|(2 n1 + 1)^2 + (2 n2 + 1)^2 - R| <= 2 / kappa`, every
/// candidate being confirmed by the exact membership test. Flagged when a
/// floating-point comparison fell inside the guard band.
pub fn lambda_count(
    kappa: Kappa,
    l: i64,
    xi: i64,
    n1: u64,
    n2: u64,
    n3: u64,
) -> Result<Checked<u64>> {
    kappa.validate()?;
    check_bands(n1, n2, n3)?;
    let (b1, g1) = product_band(&kappa, n1);
    let (b2, g2) = product_band(&kappa, n2);
    let (b3, g3) = product_band(&kappa, n3);
    let mut guard = g1 || g2 || g3;
    let by_m = |b: &[(i64, i64)]| {
        let mut map: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for &(m, n) in b {
            map.entry(m).or_default().push(n);
        }
        map
    };
    let (m1s, m2s) = (by_m(&b1), by_m(&b2));
    let k = kappa.value();
    let slack = 2.0 / k + 2.0;
    let mut count = 0u64;
    for &(m3, nn3) in &b3 {
        for (&m2, n2_list) in &m2s {
            let m1 = xi - m2 - m3;
            let Some(n1_list) = m1s.get(&m1) else {
                continue;
            };
            let msq = m1 * m1 + m2 * m2 + m3 * m3;
            let r = -4.0 * (nn3 * nn3 + nn3) as f64 + 2.0 + 4.0 / k * (l - msq) as f64;
            let (lo2, hi2) = (n2_list[0], *n2_list.last().unwrap());
            for &nn1 in n1_list {
                let a = ((2 * nn1 + 1) * (2 * nn1 + 1)) as f64;
                let hi = r - a + slack;
                if hi < 1.0 {
                    continue;
                }
                let lo = (r - a - slack).max(0.0);
                let t_lo = (lo.sqrt().floor() as i64 - 1).max(1);
                let t_hi = hi.sqrt().ceil() as i64 + 1;
                let n_lo = ((t_lo - 1) / 2).max(lo2);
                let n_hi = ((t_hi - 1) / 2).min(hi2);
                for nn2 in n_lo..=n_hi {
                    if n2_list.binary_search(&nn2).is_err() {
                        continue;
                    }
                    let nsum = nn1 * nn1 + nn1 + nn2 * nn2 + nn2 + nn3 * nn3 + nn3;
                    match kappa.resonant(l, msq, nsum) {
                        Verdict::In => count += 1,
                        Verdict::Guard => guard = true,
                        Verdict::Out => {}
                    }
                }
            }
        }
    }
    Ok(Checked::flagged(count, guard))
}

/// `sup_{(l, xi)} lambda_count` by one pass over all band triples, with the
/// lexicographically smallest maximiser.
pub fn lambda_sup(kappa: Kappa, n1: u64, n2: u64, n3: u64) -> Result<Checked<(u64, (i64, i64))>> {
    kappa.validate()?;
    check_bands(n1, n2, n3)?;
    let (b1, g1) = product_band(&kappa, n1);
    let (b2, g2) = product_band(&kappa, n2);
    let (b3, g3) = product_band(&kappa, n3);
    type Key = (i64, i64, i64);
    // Rational kappa collapses (msq, nsum) to the exact scaled eigenvalue.
    let point = |&(m, n): &(i64, i64)| match kappa {
        Kappa::Rational { num, den } => (m, den as i64 * m * m + num as i64 * (n * n + n), 0),
        Kappa::Real { .. } => (m, m * m, n * n + n),
    };
    let mut pairs: HashMap<Key, u64> = HashMap::new();
    for p2 in b2.iter().map(point) {
        for p3 in b3.iter().map(point) {
            *pairs
                .entry((p2.0 + p3.0, p2.1 + p3.1, p2.2 + p3.2))
                .or_default() += 1;
        }
    }
    let pairs: Vec<(Key, u64)> = pairs.into_iter().collect();
    let mut triples: HashMap<Key, u64> = HashMap::new();
    for p1 in b1.iter().map(point) {
        for &(q, c) in &pairs {
            *triples
                .entry((p1.0 + q.0, p1.1 + q.1, p1.2 + q.2))
                .or_default() += c;
        }
    }
    let mut total: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    let mut guard = g1 || g2 || g3;
    for ((xi, x, y), c) in triples {
        let (msq, nsum, s) = match kappa {
            Kappa::Rational { den, .. } => (x, 0, x as f64 / den as f64),
            Kappa::Real { value } => (x, y, x as f64 + value * y as f64),
        };
        let l0 = (s - 0.5).ceil() as i64;
        for l in l0 - 1..=l0 + 1 {
            let verdict = match kappa {
                Kappa::Rational { den, .. } => resonant_scaled(den, l, msq),
                Kappa::Real { .. } => kappa.resonant(l, msq, nsum),
            };
            match verdict {
                Verdict::In => *total.entry((l, xi)).or_default() += c,
                Verdict::Guard => guard = true,
                Verdict::Out => {}
            }
        }
    }
    let mut best = (0u64, (0i64, 0i64));
    for (&key, &c) in &total {
        if c > best.0 {
            best = (c, key);
        }
    }
    Ok(Checked::flagged(best, guard))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Counter {
    /// `max_{tau <= tau_max} gauss_rep_count(tau, N)`.
    GaussRep { tau_max: u64 },
    /// `sup_tau alpha_count(N, N, tau)`.
    Alpha,
    /// `sup_{l, xi} lambda_count(kappa, l, xi, N, N, N)`, normalised by `N^3`.
    Lambda { kappa: Kappa },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub n: u64,
    pub max_count: u64,
    pub argmax: Vec<i64>,
    /// `max_count / N^3` for the trilinear counter, `max_count` otherwise.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub counter: Counter,
    pub rows: Vec<CountRow>,
    /// Log-log growth of `max_count` in `N`, when at least three rows exist.
    pub fit: Option<ExponentFit>,
    pub guard_hits: bool,
    /// Boundary convention for `|l - sum lambda| <= 1/2`.
    pub tie_convention: String,
}

impl CountReport {
    pub fn max_count(&self) -> u64 {
        self.rows.iter().map(|r| r.max_count).max().unwrap_or(0)
    }
}

pub fn count_sweep(counter: Counter, schedule: &[u64]) -> Result<CountReport> {
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "schedule must be strictly increasing".into(),
        ));
    }
    let rows: Vec<(CountRow, bool)> = schedule
        .par_iter()
        .map(|&n| -> Result<(CountRow, bool)> {
            Ok(match counter {
                Counter::GaussRep { tau_max } => {
                    if n == 0 {
                        return Err(Error::Parameter("N must be positive".into()));
                    }
                    let (c, t) = gauss_rep_max(n, tau_max);
                    (
                        CountRow {
                            n,
                            max_count: c,
                            argmax: vec![t as i64],
                            normalized: c as f64,
                        },
                        false,
                    )
                }
                Counter::Alpha => {
                    let (c, t) = alpha_sup(n, n)?;
                    (
                        CountRow {
                            n,
                            max_count: c,
                            argmax: vec![t],
                            normalized: c as f64,
                        },
                        false,
                    )
                }
                Counter::Lambda { kappa } => {
                    let r = lambda_sup(kappa, n, n, n)?;
                    let (c, (l, xi)) = r.value;
                    let norm = c as f64 / (n as f64).powi(3);
                    (
                        CountRow {
                            n,
                            max_count: c,
                            argmax: vec![l, xi],
                            normalized: norm,
                        },
                        r.under_resolved,
                    )
                }
            })
        })
        .collect::<Result<_>>()?;
    let guard_hits = rows.iter().any(|r| r.1);
    let rows: Vec<CountRow> = rows.into_iter().map(|r| r.0).collect();
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.max_count > 0)
        .map(|r| (r.n as f64, r.max_count as f64))
        .collect();
    let fit = if samples.len() >= 3 {
        exponent_fit(&samples).ok()
    } else {
        None
    };
    Ok(CountReport {
        counter,
        rows,
        fit,
        guard_hits,
        tie_convention: "closed".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_rep_count(25, 3), 3);
        assert_eq!(gauss_rep_count(3, 1), 0);
        for n in 1..6u64 {
            for tau in 10 * n.pow(4)..10 * n.pow(4) + 200 {
                assert!(gauss_rep_count(tau, n) <= 1);
            }
        }
    }

    #[test]
    fn gauss_max_matches_pointwise() {
        for n in [1u64, 2, 3, 5, 8] {
            let (c, t) = gauss_rep_max(n, 2000);
            let direct = (0..=2000).map(|tau| gauss_rep_count(tau, n)).max().unwrap();
            assert_eq!(c, direct);
            assert_eq!(gauss_rep_count(t, n), c);
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_count(2, 2, 23).unwrap(), 2);
        assert_eq!(alpha_count(2, 2, -1).unwrap(), 0);
        assert_eq!(alpha_count(1, 1, -5).unwrap(), 0);
        assert!(alpha_count(3, 2, 23).is_err());
        for t in -3..400 {
            assert_eq!(alpha_count(2, 8, t).unwrap(), alpha_count(8, 2, t).unwrap());
        }
    }

    #[test]
    fn lambda_trivial_and_validation() {
        let k = Kappa::Rational { num: 1, den: 1 };
        assert_eq!(lambda_count(k, -1000, 0, 2, 2, 1).unwrap().value, 0);
        assert!(lambda_count(k, 0, 0, 1, 2, 1).is_err());
        assert!(lambda_count(Kappa::Real { value: -1.0 }, 0, 0, 1, 1, 1).is_err());
    }

    #[test]
    fn lambda_sup_matches_pointwise() {
        let k = Kappa::Rational { num: 1, den: 2 };
        let sup = lambda_sup(k, 2, 2, 1).unwrap();
        let (c, (l, xi)) = sup.value;
        assert_eq!(lambda_count(k, l, xi, 2, 2, 1).unwrap().value, c);
        assert!(c > 0);
    }

    #[test]
    fn empty_schedule() {
        let r = count_sweep(Counter::Alpha, &[]).unwrap();
        assert!(r.rows.is_empty() && r.fit.is_none());
    }
}
