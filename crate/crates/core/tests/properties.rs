//! Property tests for the kernel tables, matrix utilities, schemes and models.

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use volterra::kernels::{
    build_cov_matrices, build_drift_weights, build_discrete_noise_weights, cov_entry_power, ConstantKernel, Kernel,
    PowerKernel,
};
use volterra::matrixlab::{factor_psd, kron, loewner_leq, min_eigenvalue, same_gram, tolerance_scale};
use volterra::models::{qrh_coefficients, ConvexFunctionalFamily, OrderKind, PathFunctional, QuadraticRoughHeston, TargetCurve};
use volterra::ordering::mc_order_test;
use volterra::quadrature::adaptive_gauss_kronrod;
use volterra::schemes::{interpolate, CoefficientSet, InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-2.0f64..2.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

/// Gram matrix `B B*` of a random `d × r` matrix, so possibly rank deficient.
fn psd(max_dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_dim, 1..=max_dim)
        .prop_flat_map(|(d, r)| matrix(d, r))
        .prop_map(|b| &b * b.transpose())
}

fn psd_of_dim(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=d).prop_flat_map(move |r| matrix(d, r)).prop_map(|b| &b * b.transpose())
}

fn orthogonal(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(d, d).prop_map(move |m| (m + DMatrix::identity(d, d) * 1e-3).qr().q())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cov_entries_match_adaptive_quadrature(a in -0.45f64..0.9, h in 0.01f64..1.0, i in 0usize..12, dj in 0usize..12) {
        let j = i + dj;
        let got = cov_entry_power(a, h, i, j).unwrap();
        let (fi, fj) = (i as f64, j as f64);
        let oracle = adaptive_gauss_kronrod(|u| ((fi + u) * (fj + u)).powf(a), 0.0, 1.0, 1e-13, 0.0, 4000).unwrap();
        let expect = h.powf(2.0 * a + 1.0) * oracle;
        prop_assert!((got - expect).abs() <= 1e-8 * expect.abs(), "{got} vs {expect}");
    }

    #[test]
    fn integrated_drift_weights_telescope(a in -0.9f64..1.0, n in 1usize..64, t in 0.1f64..3.0) {
        let g = TimeGrid::new(n, t).unwrap();
        let w = build_drift_weights(&PowerKernel::new(a), &g, SchemeKind::KIntegrated).unwrap();
        for k in 1..=n {
            let sum: f64 = (1..=k).map(|l| w.get(k, l)).sum();
            let expect = g.time(k).powf(a + 1.0) / (a + 1.0);
            prop_assert!((sum - expect).abs() <= 1e-12 * expect, "k = {k}: {sum} vs {expect}");
        }
    }

    #[test]
    fn step_covariances_are_symmetric_psd(a in -0.45f64..0.6, n in 1usize..24, t in 0.1f64..2.0) {
        let g = TimeGrid::new(n, t).unwrap();
        let cov = build_cov_matrices(&PowerKernel::new(a), &g).unwrap();
        for l in 1..=n {
            let s = cov.sigma(l);
            prop_assert!((&s - s.transpose()).amax() <= 1e-14 * s.amax().max(1.0));
            prop_assert!(min_eigenvalue(&s) >= -1e-10 * tolerance_scale(&s));
        }
    }

    #[test]
    fn constant_kernel_tables_coincide(c in 0.0f64..3.0, n in 1usize..40) {
        let g = TimeGrid::new(n, 1.0).unwrap();
        let k = ConstantKernel::new(c);
        let a = build_drift_weights(&k, &g, SchemeKind::KDiscrete).unwrap();
        let b = build_drift_weights(&k, &g, SchemeKind::KIntegrated).unwrap();
        for kk in 1..=n {
            for l in 1..=kk {
                prop_assert_eq!(a.get(kk, l), b.get(kk, l));
            }
        }
    }

    #[test]
    fn factor_round_trip(s in psd(6)) {
        let f = factor_psd(&s, 1e-10).unwrap();
        let err = (&f.factor * f.factor.transpose() - &s).norm();
        prop_assert!(err <= 1e-8 * (1.0 + s.norm()), "{err}");
    }

    #[test]
    fn kronecker_of_psd_is_psd(a in psd(6), b in psd(6)) {
        let k = kron(&a, &b);
        prop_assert!(min_eigenvalue(&k) >= -1e-10 * tolerance_scale(&k).max(1.0));
    }

    #[test]
    fn loewner_is_a_partial_order(s in psd_of_dim(4), p1 in psd_of_dim(4), p2 in psd_of_dim(4)) {
        let tol = 1e-10;
        prop_assert!(loewner_leq(&s, &s, tol).unwrap());
        let mid = &s + &p1;
        let top = &mid + &p2;
        prop_assert!(loewner_leq(&s, &mid, tol).unwrap());
        prop_assert!(loewner_leq(&mid, &top, tol).unwrap());
        prop_assert!(loewner_leq(&s, &top, tol).unwrap());
        // antisymmetry up to tolerance
        if loewner_leq(&mid, &s, tol).unwrap() {
            prop_assert!((&mid - &s).norm() <= 1e-6 * (1.0 + s.norm()));
        }
    }

    #[test]
    fn same_gram_under_orthogonal_factors(a in matrix(4, 4), o in orthogonal(4)) {
        prop_assert!(same_gram(&a, &(&a * o), 1e-10).unwrap());
    }

    #[test]
    fn interpolation_hits_grid_and_stays_between(vals in proptest::collection::vec(-5.0f64..5.0, 9), u in 0.0f64..1.0) {
        let g = TimeGrid::new(8, 2.0).unwrap();
        for k in 0..=8 {
            prop_assert_eq!(interpolate(&vals, 1, &g, g.time(k)).unwrap()[0], vals[k]);
        }
        let t = 2.0 * u;
        let k = ((t / g.step()) as usize).min(7);
        let v = interpolate(&vals, 1, &g, t).unwrap()[0];
        let (lo, hi) = (vals[k].min(vals[k + 1]), vals[k].max(vals[k + 1]));
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn companion_diagonal_is_the_scheme(
        n in 1usize..=32,
        a1 in -0.45f64..0.5,
        a2 in -0.45f64..0.5,
        c in -1.0f64..1.0,
        s0 in 0.1f64..1.0,
        seed in any::<u64>(),
        integrated in any::<bool>(),
    ) {
        let kind = if integrated { SchemeKind::KIntegrated } else { SchemeKind::KDiscrete };
        let g = TimeGrid::new(n, 1.0).unwrap();
        let coeffs = CoefficientSet::scalar(move |t, x| c * x + t, move |_, x| s0 + 0.3 * x.sin());
        let s = VolterraScheme::new(kind, g, coeffs, Arc::new(PowerKernel::new(a1)), Arc::new(PowerKernel::new(a2))).unwrap();
        let r = s.simulate_path(&InitialCondition::point(0.2), seed, 0).unwrap();
        let comp = s.companion_paths(&r).unwrap();
        for k in 0..=n {
            let (x, y) = (comp[k][k], r.values[k]);
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "k = {k}: {x} vs {y}");
        }
    }

    #[test]
    fn swapping_sides_negates_the_order_estimate(sx in 0.1f64..1.0, sy in 0.1f64..1.0, seed in any::<u64>()) {
        let g = TimeGrid::new(8, 1.0).unwrap();
        let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.2));
        let x = VolterraScheme::new(SchemeKind::KDiscrete, g, CoefficientSet::scalar(|_, _| 0.0, move |_, _| sx), k.clone(), k).unwrap();
        let y = x.with_coefficients(CoefficientSet::scalar(|_, _| 0.0, move |_, _| sy));
        let init = InitialCondition::point(0.0);
        let bx = x.simulate(&init, 64, seed).unwrap();
        let by = y.simulate(&init, 64, seed).unwrap();
        let fam = ConvexFunctionalFamily::standard(&[0.0, 0.3]);
        for order in [OrderKind::Cvx, OrderKind::Icv, OrderKind::Dcv] {
            let a = mc_order_test(&bx, &by, &fam, order, 4.0).unwrap();
            let b = mc_order_test(&by, &bx, &fam, order, 4.0).unwrap();
            for (ra, rb) in a.iter().zip(&b) {
                prop_assert_eq!(ra.delta_hat, -rb.delta_hat);
                prop_assert_eq!(ra.se, rb.se);
            }
        }
    }

    #[test]
    fn qrh_drift_is_affine(lambda in 0.0f64..3.0, f in -1.0f64..1.0, t in 0.0f64..1.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let m = QuadraticRoughHeston {
            a: 0.384, b_center: 0.095, c: 0.0025, hurst: 0.1, lambda, sigma_vol: 0.1, f: TargetCurve::constant(f), z0: 0.1,
        };
        let c = qrh_coefficients(&m).unwrap().coeffs;
        let r = c.b(t, x + y) - c.b(t, x) - c.b(t, y) + c.b(t, 0.0);
        prop_assert!(r.abs() <= 1e-12 * (1.0 + x.abs() + y.abs()) * (1.0 + lambda), "{r}");
    }

    #[test]
    fn vix_functional_is_convex(sigma_vol in 0.0f64..1.0, seed in any::<u64>()) {
        let m = QuadraticRoughHeston {
            a: 0.384, b_center: 0.095, c: 0.0025, hurst: 0.1, lambda: 1.2, sigma_vol, f: TargetCurve::constant(0.1), z0: 0.1,
        };
        let fam = ConvexFunctionalFamily::new(vec![PathFunctional::vix(m)]);
        prop_assert!(fam.check_convexity(&TimeGrid::new(16, 0.25).unwrap(), 100, seed).is_ok());
    }

    #[test]
    fn discrete_noise_weights_are_kernel_values(a in -0.45f64..0.5, n in 1usize..30) {
        let g = TimeGrid::new(n, 1.0).unwrap();
        let k = PowerKernel::new(a);
        let w = build_discrete_noise_weights(&k, &g).unwrap();
        for kk in 1..=n {
            for l in 1..=kk {
                let expect = k.eval(g.time(kk), g.time(l - 1));
                prop_assert!((w.get(kk, l) - expect).abs() <= 1e-14 * expect);
            }
        }
    }
}
