mod common;

use common::*;
use multispec::lattice::{
    alpha_count, alpha_sup, gauss_rep_count, gauss_rep_max, lambda_count, lambda_sup, Kappa,
};
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gauss_matches_brute_force() {
    for n in 1..=8 {
        for tau in 0..=800 {
            assert_eq!(
                gauss_rep_count(tau, n),
                naive_gauss(tau, n),
                "tau {tau} N {n}"
            );
        }
    }
}

#[test]
fn gauss_divisor_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let taus: Vec<u64> = (1..=2000)
        .chain((0..300).map(|_| rng.random_range(1..=100_000)))
        .collect();
    for tau in taus {
        let mut quadrant = 0;
        let mut n = 1;
        while n * n <= tau {
            quadrant += gauss_rep_count(tau, n);
            n *= 2;
        }
        assert_eq!(4 * quadrant, sum_of_two_squares(tau), "tau {tau}");
    }
}

#[test]
fn gauss_large_tau_unique() {
    for n in [1u64, 2, 4, 8, 16] {
        for tau in 10 * n.pow(4)..10 * n.pow(4) + 5000 {
            assert!(gauss_rep_count(tau, n) <= 1);
        }
    }
}

#[test]
fn alpha_matches_brute_force() {
    let dy = [1u64, 2, 4, 8];
    for &n1 in &dy {
        for &n2 in &dy {
            let mut best = 0;
            for tau in -4..=700 {
                let c = alpha_count(n1, n2, tau).unwrap();
                assert_eq!(c, naive_alpha(n1, n2, tau), "{n1} {n2} {tau}");
                assert_eq!(c, alpha_count(n2, n1, tau).unwrap());
                best = best.max(c);
            }
            assert_eq!(alpha_sup(n1, n2).unwrap().0, best);
        }
    }
}

#[test]
fn alpha_small_cases() {
    assert_eq!(alpha_count(2, 2, 23).unwrap(), 2);
    assert_eq!(alpha_count(4, 4, -2).unwrap(), 0);
}

fn kappa_pair(num: u64, den: u64) -> (Kappa, Q) {
    (
        Kappa::Rational { num, den },
        Q::new(num as i128, den as i128),
    )
}

#[test]
fn lambda_matches_brute_force() {
    let dy = [1u64, 2, 4, 8];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (num, den) in [(1, 1), (1, 2), (3, 1)] {
        let (k, kq) = kappa_pair(num, den);
        for &n1 in &dy {
            for &n2 in dy.iter().filter(|&&x| x <= n1) {
                for &n3 in dy.iter().filter(|&&x| x <= n2) {
                    let hist = naive_lambda(kq, n1 as i64, n2 as i64, n3 as i64);
                    let keys: Vec<_> = hist.keys().copied().collect();
                    let probe: Vec<(i64, i64)> = if keys.len() <= 400 {
                        keys.clone()
                    } else {
                        (0..400)
                            .map(|_| keys[rng.random_range(0..keys.len())])
                            .collect()
                    };
                    for (l, xi) in probe {
                        let c = lambda_count(k, l, xi, n1, n2, n3).unwrap();
                        assert!(!c.under_resolved);
                        assert_eq!(
                            c.value,
                            hist[&(l, xi)],
                            "kappa {num}/{den} N {n1},{n2},{n3} l {l} xi {xi}"
                        );
                    }
                    for (l, xi) in [(-5, 0), (0, 100), (100_000, 0)] {
                        let c = lambda_count(k, l, xi, n1, n2, n3).unwrap().value;
                        assert_eq!(c, hist.get(&(l, xi)).copied().unwrap_or(0));
                    }
                    let best = hist.values().copied().max().unwrap_or(0);
                    assert_eq!(lambda_sup(k, n1, n2, n3).unwrap().value.0, best);
                }
            }
        }
    }
}

#[test]
fn lambda_real_kappa_agrees_off_ties() {
    let k = Kappa::Real { value: 2f64.sqrt() };
    let r = lambda_sup(k, 4, 2, 2).unwrap();
    assert!(!r.under_resolved);
    assert!(r.value.0 > 0);
}

#[test]
fn lambda_real_kappa_flags_ties() {
    let r = lambda_sup(Kappa::Real { value: 0.25 }, 2, 1, 1).unwrap();
    assert!(r.under_resolved);
    let exact = lambda_sup(Kappa::Rational { num: 1, den: 4 }, 2, 1, 1).unwrap();
    assert!(!exact.under_resolved);
}

fn unpruned(kappa: Kappa, l: i64, xi: i64, n: [u64; 3]) -> u64 {
    let kq = match kappa {
        Kappa::Rational { num, den } => Q::new(num as i128, den as i128),
        Kappa::Real { .. } => unreachable!(),
    };
    let bands: Vec<Band> = n.iter().map(|&x| band(kq, x as i64)).collect();
    let half = Q::new(1, 2);
    let mut c = 0;
    for a in &bands[0].points {
        for b in &bands[1].points {
            for d in &bands[2].points {
                if a.0 + b.0 + d.0 == xi
                    && (Q::from_integer(l as i128) - a.2 - b.2 - d.2).abs() <= half
                {
                    c += 1;
                }
            }
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pruned_equals_unpruned(
        num in 1u64..6,
        den in 1u64..6,
        e in 0usize..3,
        l in -4i64..140,
        xi in -10i64..10,
    ) {
        let n = [[2u64, 2, 1], [4, 2, 1], [4, 4, 2]][e];
        let k = Kappa::Rational { num, den };
        let fast = lambda_count(k, l, xi, n[0], n[1], n[2]).unwrap().value;
        prop_assert_eq!(fast, unpruned(k, l, xi, n));
    }

    #[test]
    fn alpha_symmetric(a in 0u32..5, b in 0u32..5, tau in -5i64..2000) {
        let (n1, n2) = (1u64 << a, 1u64 << b);
        prop_assert_eq!(alpha_count(n1, n2, tau).unwrap(), alpha_count(n2, n1, tau).unwrap());
    }

    #[test]
    fn gauss_max_bounds_pointwise(n in 1u64..20, tau in 0u64..3000) {
        prop_assert!(gauss_rep_count(tau, n) <= gauss_rep_max(n, 3000).0);
    }
}
