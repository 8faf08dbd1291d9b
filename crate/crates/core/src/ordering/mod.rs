//! Comparison hypotheses, the paired Monte Carlo order test and the empirical
//! strong-rate harness.

mod hypotheses;
mod mc;
mod rate;

pub use hypotheses::{
    check_c_sigma, check_ck2, check_ck2_sigma, check_ck2_sigma_1d, check_conv_sigma, check_drift_compare,
    check_initial_order, Ck2SigmaVariant, ConditionId, DriftDirection, DriftVariant, OrderHypothesisReport,
    SamplerConfig, Verdict, Witness, MAX_TUPLE_LEN,
};
pub use mc::{any_violated, format_table, mc_order_test, simulate_coupled, McVerdict, OrderReport};
pub use rate::{convergence_rate, rate_csv, RatePoint, RateProblem, RateReport, REFERENCE_FACTOR};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::error::Error;
    use crate::kernels::{ConstantKernel, Kernel, PowerKernel};
    use crate::models::{ConvexFunctionalFamily, OrderKind};
    use crate::schemes::{CoefficientSet, InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

    fn cfg() -> SamplerConfig {
        SamplerConfig {
            samples: 400,
            seed: 11,
            ..SamplerConfig::default()
        }
    }

    fn sigma(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> CoefficientSet {
        CoefficientSet::scalar(|_, _| 0.0, move |_, x| f(x))
    }

    #[test]
    fn c_sigma_verdicts() {
        let lo = sigma(|x| 0.5 * (1.0 + x.abs()));
        let hi = sigma(|x| 1.0 + x.abs());
        assert!(check_c_sigma(&lo, &hi, &cfg()).unwrap().holds_on_sample());
        let r = check_c_sigma(&hi, &lo, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let w = r.witness.unwrap();
        assert!(w.violation > 0.0 && w.index == 0);
    }

    #[test]
    fn ck2_verdicts() {
        let k = PowerKernel::new(-0.2);
        let half = PowerKernel::scaled(-0.2, 0.5);
        assert!(check_ck2(&half, &k, &cfg()).unwrap().holds_on_sample());
        assert_eq!(check_ck2(&k, &half, &cfg()).unwrap().verdict, Verdict::Fails);
        assert_eq!(check_ck2(&PowerKernel::new(-0.3), &k, &cfg()).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn ck2_sigma_variants_agree_with_scalar_form() {
        let k = PowerKernel::new(-0.2);
        let lo = sigma(|x| 0.5 * (1.0 + x.abs()));
        let hi = sigma(|x| 1.0 + x.abs());
        for v in [Ck2SigmaVariant::Disc, Ck2SigmaVariant::Int, Ck2SigmaVariant::General] {
            assert!(check_ck2_sigma(&k, &lo, &k, &hi, v, &cfg()).unwrap().holds_on_sample(), "{v:?}");
            assert_eq!(check_ck2_sigma(&k, &hi, &k, &lo, v, &cfg()).unwrap().verdict, Verdict::Fails);
        }
        assert!(check_ck2_sigma_1d(&k, &lo, &k, &hi, &cfg()).unwrap().holds_on_sample());
        assert_eq!(check_ck2_sigma_1d(&k, &hi, &k, &lo, &cfg()).unwrap().verdict, Verdict::Fails);
        // shape mismatch fails only for tuples with j >= 2
        let other = PowerKernel::new(-0.3);
        let s = sigma(|_| 0.1);
        let t = sigma(|_| 1.0);
        let disc = check_ck2_sigma(&other, &s, &k, &t, Ck2SigmaVariant::Disc, &cfg()).unwrap();
        let one = check_ck2_sigma_1d(&other, &s, &k, &t, &cfg()).unwrap();
        assert_eq!(disc.verdict, Verdict::Fails);
        assert_eq!(one.verdict, Verdict::Fails);
    }

    #[test]
    fn conv_verdicts() {
        assert!(check_conv_sigma(&sigma(|x| 1.0 + x.abs()), &cfg()).unwrap().holds_on_sample());
        let r = check_conv_sigma(&sigma(|x| x.abs().sqrt()), &cfg()).unwrap();
        assert_eq!(r.condition, ConditionId::Conv1d);
        assert_eq!(r.verdict, Verdict::Fails);
    }

    #[test]
    fn drift_examples() {
        let one = ConstantKernel::new(1.0);
        let up = CoefficientSet::scalar(|_, _| 1.0, |_, _| 0.0);
        let down = CoefficientSet::scalar(|_, _| -1.0, |_, _| 0.0);
        for v in [DriftVariant::Disc, DriftVariant::Int] {
            let icv = check_drift_compare(&up, &one, &down, &one, DriftDirection::Icv, v, &cfg()).unwrap();
            let dcv = check_drift_compare(&up, &one, &down, &one, DriftDirection::Dcv, v, &cfg()).unwrap();
            assert_eq!(icv.verdict, Verdict::Fails);
            assert!(dcv.holds_on_sample());
            let same = check_drift_compare(&up, &one, &up, &one, DriftDirection::Icv, v, &cfg()).unwrap();
            assert!(same.holds_on_sample());
        }
    }

    #[test]
    fn initial_order_verdicts() {
        let p = InitialCondition::point(0.0);
        let g = InitialCondition::Gaussian { mean: vec![0.0], std: vec![1.0] };
        assert!(check_initial_order(&p, &g, OrderKind::Cvx, 201, 1e-12).unwrap().holds_on_sample());
        assert_eq!(check_initial_order(&g, &p, OrderKind::Cvx, 201, 1e-12).unwrap().verdict, Verdict::Fails);
        let shifted = InitialCondition::point(1.0);
        assert!(check_initial_order(&p, &shifted, OrderKind::Icv, 201, 1e-12).unwrap().holds_on_sample());
        assert_eq!(check_initial_order(&p, &shifted, OrderKind::Dcv, 201, 1e-12).unwrap().verdict, Verdict::Fails);
    }

    fn pair_batches(paths: usize) -> (crate::schemes::PathBatch, crate::schemes::PathBatch) {
        let g = TimeGrid::new(16, 1.0).unwrap();
        let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.2));
        let x = VolterraScheme::new(SchemeKind::KDiscrete, g, sigma(|_| 0.5), k.clone(), k).unwrap();
        let y = x.with_coefficients(sigma(|_| 1.0));
        let init = InitialCondition::point(0.0);
        simulate_coupled(&x, &init, &y, &init, paths, 3).unwrap()
    }

    #[test]
    fn mc_test_self_and_swap() {
        let (x, y) = pair_batches(2000);
        let fam = ConvexFunctionalFamily::standard(&[0.0, 0.5]);
        let same = mc_order_test(&x, &x, &fam, OrderKind::Cvx, 4.0).unwrap();
        assert!(same.iter().all(|r| r.delta_hat == 0.0 && r.verdict == McVerdict::Consistent));
        let a = mc_order_test(&x, &y, &fam, OrderKind::Cvx, 4.0).unwrap();
        let b = mc_order_test(&y, &x, &fam, OrderKind::Cvx, 4.0).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.delta_hat, -rb.delta_hat);
            assert_eq!(ra.se, rb.se);
        }
        assert!(!any_violated(&a));
        assert!(any_violated(&b));
        assert!(format_table(&a).lines().count() == a.len() + 1);
    }

    #[test]
    fn mc_test_rejects_mismatched_grids() {
        let (x, _) = pair_batches(10);
        let g = TimeGrid::new(8, 1.0).unwrap();
        let one: Arc<dyn Kernel> = Arc::new(ConstantKernel::new(1.0));
        let s = VolterraScheme::new(SchemeKind::KDiscrete, g, sigma(|_| 1.0), one.clone(), one).unwrap();
        let z = s.simulate(&InitialCondition::point(0.0), 10, 0).unwrap();
        let fam = ConvexFunctionalFamily::standard(&[0.0]);
        assert!(matches!(mc_order_test(&x, &z, &fam, OrderKind::Cvx, 4.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn deterministic_ode_rate_is_one() {
        let one: Arc<dyn Kernel> = Arc::new(ConstantKernel::new(1.0));
        let problem = RateProblem {
            kind: SchemeKind::KDiscrete,
            coeffs: CoefficientSet::scalar(|_, x| x, |_, _| 0.0),
            k1: one.clone(),
            k2: one,
            horizon: 1.0,
            init: InitialCondition::point(1.0),
        };
        let r = convergence_rate(&problem, 2.0, &[8, 16, 32, 64], 4, 0).unwrap();
        assert!((r.slope - 1.0).abs() < 0.1, "{}", r.slope);
        assert!(matches!(
            convergence_rate(&problem, 2.0, &[8, 12], 4, 0),
            Err(Error::Coupling(_))
        ));
    }

    #[test]
    fn integrated_coupling_is_exact_for_constant_kernels() {
        // With constant kernels both schemes reduce to Euler on the same
        // Brownian path, so errors vanish up to rounding for b = 0, σ = 1.
        let one: Arc<dyn Kernel> = Arc::new(ConstantKernel::new(1.0));
        let problem = RateProblem {
            kind: SchemeKind::KIntegrated,
            coeffs: sigma(|_| 1.0),
            k1: one.clone(),
            k2: one,
            horizon: 1.0,
            init: InitialCondition::point(0.0),
        };
        match convergence_rate(&problem, 2.0, &[2, 4], 3, 0) {
            // exact zeros cannot be fitted on a log scale
            Err(Error::Domain(_)) => {}
            Ok(r) => assert!(r.points.iter().all(|p| p.error < 1e-13), "{r:?}"),
            Err(e) => panic!("{e}"),
        }
    }
}
