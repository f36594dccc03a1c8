use multispec::estimates::{estimate_ratio, product_grid, sup_ratio_sweep};
use multispec::evolution::{linear_propagate, Nonlinearity};
use multispec::harmonics::random_combination;
use multispec::manifold::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn manifold_strategy() -> impl Strategy<Value = Manifold> {
    prop_oneof![
        (0.5f64..2.0).prop_map(|rho| Manifold::S2 { rho }),
        Just(Manifold::S3),
        (0.5f64..2.0).prop_map(|rho| Manifold::S2xS1 { rho }),
        (2u32..5).prop_map(|dim| Manifold::Zonal { dim }),
    ]
}

fn field(m: Manifold, deg: u32, seed: u64) -> SpectralField {
    random_combination(m, &m.modes_up_to(deg), seed).unwrap()
}

fn dyadics() -> Vec<f64> {
    (0..12).map(|j| 2f64.powi(j)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_round_trip(m in manifold_strategy(), deg in 0u32..7, seed in 0u64..1000) {
        let u = field(m, deg, seed);
        let grid = build_grid(m, 2 * deg.max(1)).unwrap();
        let vals = synthesize(&u, &grid).unwrap();
        prop_assert!(!vals.under_resolved);
        let mass = vals.value.norm_sqr();
        prop_assert!((mass - u.l2_norm().powi(2)).abs() < 1e-10 * mass.max(1.0));
        let back = analyze(&vals.value, deg).unwrap().value;
        prop_assert!(back.sub(&u).unwrap().l2_norm() < 1e-10 * u.l2_norm());
    }

    #[test]
    fn dyadic_projectors_are_idempotent(m in manifold_strategy(), deg in 0u32..12, seed in 0u64..1000, j in 0i32..5) {
        let u = field(m, deg, seed);
        let n = 2f64.powi(j);
        for mode in [DyadicMode::Band, DyadicMode::Lowpass] {
            let once = dyadic_project(&u, n, mode).unwrap();
            prop_assert_eq!(dyadic_project(&once, n, mode).unwrap(), once);
        }
    }

    #[test]
    fn dyadic_bands_partition_unity(m in manifold_strategy(), deg in 0u32..16, seed in 0u64..1000) {
        let u = field(m, deg, seed);
        let mut sum = SpectralField::zero(m);
        let mut low = SpectralField::zero(m);
        for n in dyadics() {
            let band = dyadic_project(&u, n, DyadicMode::Band).unwrap();
            sum = sum.add(&band).unwrap();
            low = low.add(&band).unwrap();
            let lp = dyadic_project(&u, n, DyadicMode::Lowpass).unwrap();
            prop_assert!(lp.sub(&low).unwrap().l2_norm() < 1e-14);
        }
        prop_assert!(sum.sub(&u).unwrap().l2_norm() < 1e-14);
        let energy: f64 = dyadics().iter().map(|&n| dyadic_project(&u, n, DyadicMode::Band).unwrap().l2_norm().powi(2)).sum();
        prop_assert!((energy - u.l2_norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn free_flow_is_unitary(m in manifold_strategy(), deg in 0u32..10, seed in 0u64..1000, t in -50.0f64..50.0) {
        let u = field(m, deg, seed);
        let v = linear_propagate(&u, t);
        prop_assert!((v.l2_norm() - u.l2_norm()).abs() < 1e-13 * u.l2_norm().max(1.0));
        prop_assert!((sobolev_norm(&v, 1.0) - sobolev_norm(&u, 1.0)).abs() < 1e-12 * sobolev_norm(&u, 1.0).max(1.0));
        prop_assert!(linear_propagate(&v, -t).sub(&u).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn nonlinearity_is_gauge_invariant(
        alpha in 1.1f64..9.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        theta in -7.0f64..7.0,
        t in 0.0f64..2.0,
    ) {
        let z = Complex64::new(re, im);
        let g = Complex64::from_polar(1.0, theta);
        for nl in [Nonlinearity::pure_power(alpha).unwrap(), Nonlinearity::smooth_power(alpha).unwrap()] {
            let lhs = nl.force(g * z);
            let rhs = g * nl.force(z);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            prop_assert!((nl.rotate(z, t).norm() - z.norm()).abs() <= 1e-13 * (1.0 + z.norm()));
            prop_assert!((nl.potential(g * z) - nl.potential(z)).abs() <= 1e-12 * (1.0 + nl.potential(z)));
        }
    }

    #[test]
    fn estimate_ratio_is_scale_invariant(deg in 1u32..6, s1 in 0u64..500, re in 0.1f64..5.0, im in -5.0f64..5.0) {
        let m = Manifold::S2 { rho: 1.0 };
        let f = field(m, deg, s1);
        let g = field(m, deg + 1, s1 + 1);
        let grid = product_grid(m, &[deg, deg + 1]).unwrap();
        let base = estimate_ratio(&[&f, &g], &grid).unwrap().value;
        let scaled = f.scale(Complex64::new(re, im));
        let r = estimate_ratio(&[&scaled, &g], &grid).unwrap().value;
        prop_assert!((r - base).abs() < 1e-12 * base);
    }
}

#[test]
fn band_limited_sup_norms_grow_at_most_like_weyl() {
    let schedule = [4.0, 8.0, 16.0, 32.0, 64.0];
    let random = sup_ratio_sweep(Manifold::S3, &schedule, 4, 7, false).unwrap();
    assert!(random.fit.slope <= 1.5 + 0.1, "{}", random.fit.slope);
    let zonal = sup_ratio_sweep(Manifold::Zonal { dim: 3 }, &schedule, 1, 0, true).unwrap();
    assert!(zonal.fit.slope >= 1.0, "{}", zonal.fit.slope);
}
