//! The K-discrete and K-integrated Euler schemes, their continuous-time
//! extensions, companion processes and the interpolation operator `i_n`.

mod batch;
mod coeffs;
mod extend;
mod grid;
mod noise;
mod scheme;

pub use batch::PathBatch;
pub use coeffs::{AffineDrift, CoefficientSet, DiffusionFn, DriftFn, InitialCondition, TimeFn};
pub use extend::interpolate;
pub use grid::{SchemeKind, TimeGrid, MAX_STEPS};
pub use noise::{FactorSummary, NoisePlan, NoiseWeights, StepFactors};
pub use scheme::{
    simulate_k_discrete, simulate_k_integrated, PathRecord, SchemeWeights, VolterraScheme, DEFAULT_BLOWUP_CAP,
};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_relative_eq;

    use super::*;
    use crate::engine::{moments, substream_for, StreamPurpose};
    use crate::error::Error;
    use crate::kernels::{ConstantKernel, Kernel, PowerKernel};

    fn one() -> Arc<dyn Kernel> {
        Arc::new(ConstantKernel::new(1.0))
    }

    fn zero() -> Arc<dyn Kernel> {
        Arc::new(ConstantKernel::new(0.0))
    }

    #[test]
    fn discrete_scheme_with_unit_kernels_is_brownian_motion() {
        let g = TimeGrid::new(8, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, _| 0.0, |_, _| 1.0);
        let s = VolterraScheme::new(SchemeKind::KDiscrete, g, c, one(), one()).unwrap();
        let r = s.simulate_path(&InitialCondition::point(0.0), 4, 2).unwrap();
        let mut w = 0.0;
        for k in 1..=8 {
            w += r.noise.increment(k, 0);
            assert_relative_eq!(r.values[k], w, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_drift_gives_time() {
        let g = TimeGrid::new(10, 2.0).unwrap();
        let c = CoefficientSet::scalar(|_, _| 1.0, |_, _| 0.0);
        for kind in [SchemeKind::KDiscrete, SchemeKind::KIntegrated] {
            let s = VolterraScheme::new(kind, g, c.clone(), one(), one()).unwrap();
            let b = s.simulate(&InitialCondition::point(0.0), 3, 1).unwrap();
            for k in 0..=10 {
                assert_relative_eq!(b.value(2, k, 0), g.time(k), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn linear_drift_is_explicit_euler() {
        let g = TimeGrid::new(5, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, x| x, |_, _| 0.0);
        let s = VolterraScheme::new(SchemeKind::KIntegrated, g, c, one(), one()).unwrap();
        let b = s.simulate(&InitialCondition::point(1.0), 1, 0).unwrap();
        for k in 0..=5 {
            assert_relative_eq!(b.value(0, k, 0), 1.2f64.powi(k as i32), max_relative = 1e-14);
        }
    }

    #[test]
    fn discrete_variance_matches_formula() {
        let (n, t) = (16, 1.0);
        let g = TimeGrid::new(n, t).unwrap();
        let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.2));
        let c = CoefficientSet::scalar(|_, _| 0.0, |_, _| 1.0);
        let b = simulate_k_discrete(c, k.clone(), k, g, &InitialCondition::point(0.0), 100_000, 17).unwrap();
        let m = moments(&b.column(n)).unwrap();
        let h = g.step();
        let expect: f64 = (1..=n).map(|l| (t - g.time(l - 1)).powf(-0.4) * h).sum();
        assert!((m.variance - expect).abs() < 3.0 * m.variance_se, "{} vs {expect}", m.variance);
    }

    #[test]
    fn integrated_constant_kernel_has_brownian_marginals() {
        let g = TimeGrid::new(8, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, _| 0.0, |_, _| 1.0);
        let b = simulate_k_integrated(c, one(), one(), g, &InitialCondition::point(0.0), 100_000, 5).unwrap();
        for k in [2, 5, 8] {
            let m = moments(&b.column(k)).unwrap();
            assert!((m.variance - g.time(k)).abs() < 3.0 * m.variance_se);
        }
    }

    #[test]
    fn determinism_across_thread_counts() {
        let g = TimeGrid::new(16, 1.0).unwrap();
        let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.3));
        let c = CoefficientSet::scalar(|_, x| -x, |_, x| 0.3 + 0.1 * x.sin());
        let s = VolterraScheme::new(SchemeKind::KIntegrated, g, c, k.clone(), k).unwrap();
        let init = InitialCondition::Gaussian { mean: vec![0.1], std: vec![0.2] };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| s.simulate(&init, 500, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert!(a.paths.iter().zip(&b.paths).all(|(x, y)| x.to_bits() == y.to_bits()));
        for p in 0..500 {
            assert_eq!(a.value(p, 0, 0), s.sample_initial(&init, 99, p as u64)[0]);
        }
    }

    #[test]
    fn blowup_is_reported() {
        let g = TimeGrid::new(50, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, x| x * x, |_, _| 0.0);
        let s = VolterraScheme::new(SchemeKind::KDiscrete, g, c, one(), zero()).unwrap();
        let r = s.simulate(&InitialCondition::point(10.0), 2, 0);
        assert!(matches!(r, Err(Error::NumericalBlowup { path: 0, .. })), "{r:?}");
    }

    #[test]
    fn companion_diagonal_is_the_scheme() {
        let g = TimeGrid::new(12, 1.0).unwrap();
        let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.35));
        let c = CoefficientSet::scalar(|t, x| 0.5 - x + t, |_, x| 0.2 + 0.1 * x.abs());
        for kind in [SchemeKind::KDiscrete, SchemeKind::KIntegrated] {
            let s = VolterraScheme::new(kind, g, c.clone(), k.clone(), k.clone()).unwrap();
            let r = s.simulate_path(&InitialCondition::point(0.3), 8, 3).unwrap();
            let comp = s.companion_paths(&r).unwrap();
            for kk in 0..=12 {
                assert_eq!(comp[kk][kk], r.values[kk]);
            }
        }
    }

    #[test]
    fn one_step_companion_is_one_euler_step() {
        let g = TimeGrid::new(1, 0.5).unwrap();
        let c = CoefficientSet::scalar(|_, x| 2.0 * x, |_, _| 0.7);
        let s = VolterraScheme::new(SchemeKind::KDiscrete, g, c, one(), one()).unwrap();
        let r = s.simulate_path(&InitialCondition::point(1.0), 1, 0).unwrap();
        let comp = s.companion_paths(&r).unwrap();
        let expect = 1.0 + 2.0 * 0.5 + 0.7 * r.noise.increment(1, 0);
        assert_relative_eq!(comp[1][1], expect, max_relative = 1e-15);
    }

    #[test]
    fn interpolation_examples() {
        let g = TimeGrid::new(1, 1.0).unwrap();
        assert_eq!(interpolate(&[0.0, 1.0], 1, &g, 0.5).unwrap(), vec![0.5]);
        let g4 = TimeGrid::new(4, 1.0).unwrap();
        assert_eq!(interpolate(&[2.0; 5], 1, &g4, 0.33).unwrap(), vec![2.0]);
        assert!(matches!(interpolate(&[2.0; 5], 1, &g4, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn extension_matches_grid_and_deterministic_drift() {
        let g = TimeGrid::new(4, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, _| 1.0, |_, _| 1.0);
        for kind in [SchemeKind::KDiscrete, SchemeKind::KIntegrated] {
            let s = VolterraScheme::new(kind, g, c.clone(), one(), zero()).unwrap();
            let r = s.simulate_path(&InitialCondition::point(0.0), 1, 0).unwrap();
            let mut rng = substream_for(1, 0, StreamPurpose::Extension);
            assert_eq!(s.extend_continuous(&r, 0.5, &mut rng).unwrap()[0], r.values[2]);
            assert_relative_eq!(s.extend_continuous(&r, 0.6, &mut rng).unwrap()[0], 0.6, epsilon = 1e-14);
            assert!(s.extend_continuous(&r, 1.2, &mut rng).is_err());
        }
    }

    #[test]
    fn csv_export_layout() {
        let g = TimeGrid::new(16, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, _| 0.0, |_, _| 1.0);
        let b = simulate_k_discrete(c, one(), one(), g, &InitialCondition::point(0.0), 100, 1).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path,k,t,x_1");
        assert_eq!(lines.len(), 1 + 100 * 17);
    }
}
