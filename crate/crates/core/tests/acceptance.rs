//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;

use volterra::engine::{moments, substream};
use volterra::kernels::{ConstantKernel, Kernel, PowerKernel};
use volterra::matrixlab::{kron, min_eigenvalue, same_gram, tolerance_scale};
use volterra::models::{
    qrh_coefficients, vix_paired_difference, vix_premium, ConvexFunctionalFamily, OrderKind, PathFunctional,
    QuadraticRoughHeston, TargetCurve,
};
use volterra::ordering::{
    check_c_sigma, check_ck2, check_ck2_sigma, check_ck2_sigma_1d, check_conv_sigma, check_drift_compare,
    convergence_rate, mc_order_test, Ck2SigmaVariant, DriftDirection, DriftVariant, OrderHypothesisReport,
    RateProblem, SamplerConfig, Verdict,
};
use volterra::schemes::{CoefficientSet, InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

struct Outcome {
    pass: bool,
    detail: String,
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn power(alpha: f64) -> Arc<dyn Kernel> {
    Arc::new(PowerKernel::new(alpha))
}

fn exact_law() -> Outcome {
    let start = Instant::now();
    let b = single_threaded(|| {
        let g = TimeGrid::new(64, 1.0).unwrap();
        let c = CoefficientSet::scalar(|_, _| 0.0, |_, _| 1.0);
        let s = VolterraScheme::new(SchemeKind::KIntegrated, g, c, power(-0.2), power(-0.2)).unwrap();
        s.simulate(&InitialCondition::point(0.0), 100_000, 1).unwrap()
    });
    let secs = start.elapsed().as_secs_f64();
    let m = moments(&b.column(64)).unwrap();
    let expect = 1.0 / 0.6;
    let z = (m.variance - expect) / m.variance_se;
    Outcome {
        pass: z.abs() <= 3.0 && secs < 30.0,
        detail: format!("var {:.5} vs {expect:.5} ({z:+.2} SE), {secs:.1} s on one thread", m.variance),
    }
}

fn rate(alpha: f64, lo: f64, hi: f64) -> Outcome {
    let start = Instant::now();
    let problem = RateProblem {
        kind: SchemeKind::KDiscrete,
        coeffs: CoefficientSet::scalar(|_, x| -x, |_, x| 0.4 + 0.2 * x.sin()),
        k1: power(alpha),
        k2: power(alpha),
        horizon: 1.0,
        init: InitialCondition::point(0.0),
    };
    let r = convergence_rate(&problem, 2.0, &[32, 64, 128, 256], 20_000, 7).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let errs: Vec<String> = r.points.iter().map(|p| format!("{:.3e}", p.error)).collect();
    Outcome {
        pass: r.slope >= lo && r.slope <= hi && secs < 300.0,
        detail: format!(
            "slope {:.3} (95% CI {:.3}..{:.3}), target [{lo}, {hi}], errors [{}], {secs:.1} s",
            r.slope,
            r.slope_ci.0,
            r.slope_ci.1,
            errs.join(", ")
        ),
    }
}

fn convex_order() -> Outcome {
    let g = TimeGrid::new(32, 1.0).unwrap();
    let k = power(-0.2);
    let init = InitialCondition::point(0.0);
    let x = VolterraScheme::new(
        SchemeKind::KIntegrated,
        g,
        CoefficientSet::scalar(|_, _| 0.0, |_, x| 0.5 * (1.0 + x.abs())),
        k.clone(),
        k.clone(),
    )
    .unwrap();
    let y = x.with_coefficients(CoefficientSet::scalar(|_, _| 0.0, |_, x| 1.0 + x.abs()));
    let bx = x.simulate(&init, 100_000, 4).unwrap();
    let by = y.simulate(&init, 100_000, 4).unwrap();
    let mut fam = ConvexFunctionalFamily::new(vec![]);
    for strike in [0.0, 0.5, 1.0] {
        fam.push(PathFunctional::call(strike));
    }
    fam.push(PathFunctional::sup_norm());
    fam.push(PathFunctional::integral_square());
    let reports = mc_order_test(&bx, &by, &fam, OrderKind::Cvx, 4.0).unwrap();
    let worst = reports.iter().map(|r| r.delta_hat / r.se).fold(f64::INFINITY, f64::min);
    let none_violated = reports.iter().all(|r| r.delta_hat >= -4.0 * r.se);

    // constant σ: X_T is Gaussian with variance σ² T^{0.6} / 0.6
    let cx = x.with_coefficients(CoefficientSet::scalar(|_, _| 0.0, |_, _| 0.5));
    let cy = x.with_coefficients(CoefficientSet::scalar(|_, _| 0.0, |_, _| 1.0));
    let (gx, gy) = (cx.simulate(&init, 100_000, 5).unwrap(), cy.simulate(&init, 100_000, 5).unwrap());
    let call = ConvexFunctionalFamily::new(vec![PathFunctional::call(0.0)]);
    let r = &mc_order_test(&gx, &gy, &call, OrderKind::Cvx, 4.0).unwrap()[0];
    let v1: f64 = 1.0 / 0.6;
    let expect = (v1.sqrt() - (0.25 * v1).sqrt()) / (2.0 * std::f64::consts::PI).sqrt();
    let z = (r.delta_hat - expect) / r.se;
    Outcome {
        pass: none_violated && z.abs() <= 3.0,
        detail: format!(
            "{} functionals, min delta/se {worst:.1}; Gaussian call delta {:.5} vs {expect:.5} ({z:+.2} SE)",
            reports.len(),
            r.delta_hat
        ),
    }
}

fn vix_monotone() -> Outcome {
    let base = QuadraticRoughHeston {
        a: 0.384,
        b_center: 0.095,
        c: 0.0025,
        hurst: 0.1,
        lambda: 1.2,
        sigma_vol: 0.05,
        f: TargetCurve::constant(0.1),
        z0: 0.1,
    };
    let g = TimeGrid::new(128, 0.25).unwrap();
    let runs: Vec<_> = [0.05, 0.10, 0.15]
        .iter()
        .map(|s| {
            let m = base.with_sigma_vol(*s);
            let setup = qrh_coefficients(&m).unwrap();
            let scheme = VolterraScheme::new(SchemeKind::KDiscrete, g, setup.coeffs, setup.k1, setup.k2).unwrap();
            let b = scheme.simulate(&InitialCondition::point(m.z0), 50_000, 12).unwrap();
            (m, b)
        })
        .collect();
    let est: Vec<f64> = runs.iter().map(|(m, b)| vix_premium(b, m).unwrap().estimate).collect();
    let mut pass = true;
    let mut diffs = Vec::new();
    for w in runs.windows(2) {
        let d = vix_paired_difference(&w[0].1, &w[0].0, &w[1].1, &w[1].0).unwrap();
        pass &= d.mean >= -2.0 * d.se;
        diffs.push(format!("{:+.3e} ({:.1} SE)", d.mean, d.mean / d.se));
    }
    Outcome {
        pass,
        detail: format!(
            "premiums {:.6} {:.6} {:.6}, paired steps {}",
            est[0],
            est[1],
            est[2],
            diffs.join(", ")
        ),
    }
}

fn companion_identity() -> Outcome {
    let mut rng = substream(2024, 0);
    let mut worst = 0.0f64;
    let mut configs = 0;
    for _ in 0..100 {
        let n = 1 + (rng.next_u64() % 32) as usize;
        let a1 = -0.45 + 0.9 * rng.next_uniform();
        let a2 = -0.45 + 0.9 * rng.next_uniform();
        let (c, s0) = (2.0 * rng.next_uniform() - 1.0, 0.1 + rng.next_uniform());
        let seed = rng.next_u64();
        for kind in [SchemeKind::KDiscrete, SchemeKind::KIntegrated] {
            let coeffs = CoefficientSet::scalar(move |t, x| c * x + t, move |_, x| s0 + 0.3 * x.sin());
            let s = VolterraScheme::new(kind, TimeGrid::new(n, 1.0).unwrap(), coeffs, power(a1), power(a2)).unwrap();
            let r = s.simulate_path(&InitialCondition::point(0.2), seed, 0).unwrap();
            let comp = s.companion_paths(&r).unwrap();
            for k in 0..=n {
                let (x, y) = (comp[k][k], r.values[k]);
                if x != y {
                    worst = worst.max((x - y).abs() / x.abs().max(f64::MIN_POSITIVE));
                }
            }
            configs += 1;
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("{configs} scheme runs, max relative gap {worst:.1e}"),
    }
}

fn random_matrix(rng: &mut volterra::engine::NormalStream, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.next_normal())
}

fn matrix_identities() -> Outcome {
    let mut rng = substream(77, 0);
    let mut kron_fail = 0;
    let mut gram_fail = 0;
    for _ in 0..200 {
        let (d1, d2) = (1 + (rng.next_u64() % 6) as usize, 1 + (rng.next_u64() % 6) as usize);
        let (r1, r2) = (1 + (rng.next_u64() % 6) as usize, 1 + (rng.next_u64() % 6) as usize);
        let a = random_matrix(&mut rng, d1, r1);
        let b = random_matrix(&mut rng, d2, r2);
        let k = kron(&(&a * a.transpose()), &(&b * b.transpose()));
        if min_eigenvalue(&k) < -1e-10 * tolerance_scale(&k) {
            kron_fail += 1;
        }
        let d = 1 + (rng.next_u64() % 6) as usize;
        let m = random_matrix(&mut rng, d, d);
        let o = random_matrix(&mut rng, d, d).qr().q();
        if !same_gram(&m, &(&m * o), 1e-10).unwrap() {
            gram_fail += 1;
        }
    }
    Outcome {
        pass: kron_fail == 0 && gram_fail == 0,
        detail: format!("Kronecker PSD failures {kron_fail}/200, orthogonal invariance failures {gram_fail}/200"),
    }
}

fn hypothesis_checkers() -> Outcome {
    let cfg = SamplerConfig {
        samples: 500,
        seed: 3,
        ..SamplerConfig::default()
    };
    let sig = |f: fn(f64) -> f64| CoefficientSet::scalar(|_, _| 0.0, move |_, x| f(x));
    let drift = |v: f64| CoefficientSet::scalar(move |_, _| v, |_, _| 0.0);
    let k = PowerKernel::new(-0.2);
    let half = PowerKernel::scaled(-0.2, 0.5);
    let rough = PowerKernel::new(-0.3);
    let one = ConstantKernel::new(1.0);
    let (lo, hi) = (sig(|x| 0.5 * (1.0 + x.abs())), sig(|x| 1.0 + x.abs()));
    let (c1, c2) = (sig(|_| 0.1), sig(|_| 1.0));
    let (up, down) = (drift(1.0), drift(-1.0));

    type Case<'a> = (&'a str, bool, Box<dyn Fn() -> OrderHypothesisReport + 'a>);
    let cases: Vec<Case> = vec![
        ("C-sigma +", true, Box::new(|| check_c_sigma(&lo, &hi, &cfg).unwrap())),
        ("C-sigma -", false, Box::new(|| check_c_sigma(&hi, &lo, &cfg).unwrap())),
        ("CK2 +", true, Box::new(|| check_ck2(&half, &k, &cfg).unwrap())),
        ("CK2 - (ratio > 1)", false, Box::new(|| check_ck2(&k, &half, &cfg).unwrap())),
        ("CK2 - (shape)", false, Box::new(|| check_ck2(&rough, &k, &cfg).unwrap())),
        ("CK2-sigma-disc +", true, Box::new(|| {
            check_ck2_sigma(&k, &lo, &k, &hi, Ck2SigmaVariant::Disc, &cfg).unwrap()
        })),
        ("CK2-sigma-disc -", false, Box::new(|| {
            check_ck2_sigma(&rough, &c1, &k, &c2, Ck2SigmaVariant::Disc, &cfg).unwrap()
        })),
        ("CK2-sigma-1d +", true, Box::new(|| check_ck2_sigma_1d(&half, &hi, &k, &hi, &cfg).unwrap())),
        ("CK2-sigma-1d -", false, Box::new(|| check_ck2_sigma_1d(&rough, &c1, &k, &c2, &cfg).unwrap())),
        ("Conv-1d +", true, Box::new(|| check_conv_sigma(&hi, &cfg).unwrap())),
        ("Conv-1d -", false, Box::new(|| check_conv_sigma(&sig(|x| x.abs().sqrt()), &cfg).unwrap())),
        ("drift pointwise icv +", true, Box::new(|| {
            check_drift_compare(&down, &one, &up, &one, DriftDirection::Icv, DriftVariant::Disc, &cfg).unwrap()
        })),
        ("drift pointwise icv -", false, Box::new(|| {
            check_drift_compare(&up, &one, &down, &one, DriftDirection::Icv, DriftVariant::Disc, &cfg).unwrap()
        })),
        ("drift integrated dcv +", true, Box::new(|| {
            check_drift_compare(&up, &one, &down, &one, DriftDirection::Dcv, DriftVariant::Int, &cfg).unwrap()
        })),
        ("drift integrated dcv -", false, Box::new(|| {
            check_drift_compare(&down, &k, &up, &k, DriftDirection::Dcv, DriftVariant::Int, &cfg).unwrap()
        })),
    ];
    let mut wrong = Vec::new();
    for (name, positive, run) in &cases {
        let r = run();
        let ok = if *positive {
            r.verdict == Verdict::HoldsOnSample
        } else {
            let again = run();
            r.verdict == Verdict::Fails
                && r.witness.as_ref().is_some_and(|w| w.violation.is_finite() && w.times.iter().all(|t| t.is_finite()))
                && again.witness == r.witness
        };
        if !ok {
            wrong.push(*name);
        }
    }
    Outcome {
        pass: wrong.is_empty(),
        detail: format!(
            "{}/{} verdicts correct, negatives carry reproducible witnesses{}",
            cases.len() - wrong.len(),
            cases.len(),
            if wrong.is_empty() { String::new() } else { format!("; wrong: {wrong:?}") }
        ),
    }
}

fn run_cli(args: &[&str]) -> i32 {
    let mut full = vec!["volterra"];
    full.extend_from_slice(args);
    volterra::cli::run_with_args(full)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        ("simulate", r#"{"grid": {"n": 32, "T": 1.0}, "scheme": "k-integrated", "num_paths": 500,
            "kernels": {"k1": {"type": "power", "alpha": -0.2}, "k2": {"type": "power", "alpha": -0.2}},
            "coefficients": {"drift": {"type": "affine", "a": 0.1, "b": -1.0}, "diffusion": {"type": "sin_affine", "a": 0.4, "b": 0.2}},
            "init": {"type": "gaussian", "mean": [0.0], "std": [0.1]}}"#),
        ("price-vix", r#"{"grid": {"n": 32, "T": 0.25}, "num_paths": 500,
            "model": {"a": 0.384, "b_center": 0.095, "c": 0.0025, "H": 0.1, "lambda": 1.2, "sigma_vol": 0.1, "f": 0.1, "z0": 0.1},
            "vix": {"sigma_vol_sweep": [0.05, 0.1]}}"#),
        ("check-order", r#"{"grid": {"n": 16, "T": 1.0}, "num_paths": 500,
            "kernels": {"k1": {"type": "power", "alpha": -0.2}, "k2": {"type": "power", "alpha": -0.2}},
            "coefficients": {"drift": {"type": "constant", "value": 0.0}, "diffusion": {"type": "abs_affine", "a": 0.5, "b": 0.5}},
            "order": {"y": {"coefficients": {"drift": {"type": "constant", "value": 0.0}, "diffusion": {"type": "abs_affine", "a": 1.0, "b": 1.0}}},
                      "order": "cvx", "z": 4.0, "family": {"include": ["call", "sup-norm"], "strikes": [0.0]}, "check_hypotheses": true},
            "sampler": {"samples": 100, "j_max": 4, "radius": 2.0, "tol": 1e-10, "seed": 1, "initial_strikes": 51}}"#),
        ("check-hypotheses", r#"{"grid": {"n": 16, "T": 1.0},
            "kernels": {"k1": {"type": "power", "alpha": -0.2}, "k2": {"type": "power", "alpha": -0.2}},
            "sampler": {"samples": 100, "j_max": 4, "radius": 2.0, "tol": 1e-10, "seed": 1, "initial_strikes": 51}}"#),
        ("rate", r#"{"grid": {"n": 8, "T": 1.0}, "num_paths": 200,
            "kernels": {"k1": {"type": "power", "alpha": -0.2}, "k2": {"type": "power", "alpha": -0.2}},
            "coefficients": {"drift": {"type": "affine", "a": 0.0, "b": -1.0}, "diffusion": {"type": "sin_affine", "a": 0.4, "b": 0.2}},
            "rate": {"p": 2.0, "n_list": [4, 8, 16]}}"#),
    ];
    let mut bad = Vec::new();
    for (cmd, body) in configs {
        let cfg = tmp.path().join(format!("{cmd}.json"));
        std::fs::write(&cfg, body).unwrap();
        let outs: Vec<_> = ["1", "8"]
            .iter()
            .map(|t| {
                let out = tmp.path().join(format!("{cmd}-{t}"));
                let code = run_cli(&[cmd, "--config", cfg.to_str().unwrap(), "--threads", t, "--out", out.to_str().unwrap()]);
                (code, dir_bytes(&out))
            })
            .collect();
        if outs[0].0 != 0 || outs[0] != outs[1] {
            bad.push(cmd);
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "all five commands byte-identical on 1 and 8 threads".into()
        } else {
            format!("differences or errors in {bad:?}")
        },
    }
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 exact-law variance, K-integrated n=64", Box::new(exact_law)),
        ("2 strong rate, power kernels alpha=-0.2", Box::new(|| rate(-0.2, 0.2, 0.4))),
        ("3 strong rate, smooth kernels", Box::new(|| rate(0.0, 0.4, 0.6))),
        ("4 convex order reproduction", Box::new(convex_order)),
        ("5 VIX premium monotone in sigma_vol", Box::new(vix_monotone)),
        ("6 companion diagonal identity", Box::new(companion_identity)),
        ("7 matrix identity suite", Box::new(matrix_identities)),
        ("8 hypothesis checkers", Box::new(hypothesis_checkers)),
        ("9 determinism across thread counts", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
