//! Exhaustive lattice counters shared by the oracle and acceptance targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use num_traits::One;
use rayon::prelude::*;

pub type Q = Ratio<i128>;

pub fn naive_gauss(tau: u64, n: u64) -> u64 {
    let mut c = 0;
    for k1 in 0..=tau {
        if k1 * k1 > tau {
            break;
        }
        for k2 in 0..=tau {
            if k1 * k1 + k2 * k2 > tau {
                break;
            }
            if k1 * k1 + k2 * k2 == tau && n <= k1 && k1 < 2 * n {
                c += 1;
            }
        }
    }
    c
}

pub fn in_band_q(lam: Q, n: i128) -> bool {
    let j = Q::one() + lam * lam;
    let n4 = Q::from_integer(n.pow(4));
    n4 <= j && j < n4 * 16
}

pub fn naive_alpha(n1: u64, n2: u64, tau: i64) -> u64 {
    let mut c = 0;
    for k1 in 1..200i128 {
        for k2 in 1..200i128 {
            if k1 * k1 + k2 * k2 == tau as i128 + 2
                && in_band_q(Q::from_integer(k1 * k1 - 1), n1 as i128)
                && in_band_q(Q::from_integer(k2 * k2 - 1), n2 as i128)
            {
                c += 1;
            }
        }
    }
    c
}

pub fn sum_of_two_squares(tau: u64) -> u64 {
    let (mut d1, mut d3) = (0i64, 0i64);
    for d in 1..=tau {
        if tau % d == 0 {
            match d % 4 {
                1 => d1 += 1,
                3 => d3 += 1,
                _ => {}
            }
        }
    }
    4 * (d1 - d3) as u64
}

pub struct Band {
    pub points: Vec<(i64, i64, Q)>,
}

pub fn band(kappa: Q, n: i64) -> Band {
    let mut points = Vec::new();
    for m in -3 * n..=3 * n {
        for nn in 0..=6 * n + 6 {
            let lam =
                Q::from_integer((m * m) as i128) + kappa * Q::from_integer((nn * nn + nn) as i128);
            if in_band_q(lam, n as i128) {
                points.push((m, nn, lam));
            }
        }
    }
    Band { points }
}

/// Six-fold enumeration, histogrammed over `(l, xi)`. Band membership is
/// decided in rationals; eigenvalue sums are carried as integer multiples of
/// `1 / den(kappa)`.
pub fn naive_lambda(kappa: Q, n1: i64, n2: i64, n3: i64) -> BTreeMap<(i64, i64), u64> {
    let den = *kappa.denom();
    let scaled = |b: Band| -> Vec<(i64, i128)> {
        b.points
            .iter()
            .map(|&(m, _, lam)| (m, (lam * den).to_integer()))
            .collect()
    };
    let (b1, b2, b3) = (
        scaled(band(kappa, n1)),
        scaled(band(kappa, n2)),
        scaled(band(kappa, n3)),
    );
    let partial: Vec<HashMap<(i64, i64), u64>> = b1
        .par_iter()
        .map(|&(m1, l1)| {
            let mut hist = HashMap::new();
            for &(m2, l2) in &b2 {
                for &(m3, l3) in &b3 {
                    let s = l1 + l2 + l3;
                    let lo = (2 * s - den).div_euclid(2 * den) - 1;
                    for l in lo..lo + 4 {
                        if (2 * (l * den - s)).abs() <= den {
                            *hist.entry((l as i64, m1 + m2 + m3)).or_insert(0) += 1;
                        }
                    }
                }
            }
            hist
        })
        .collect();
    let mut total = BTreeMap::new();
    for h in partial {
        for (k, c) in h {
            *total.entry(k).or_insert(0) += c;
        }
    }
    total
}

