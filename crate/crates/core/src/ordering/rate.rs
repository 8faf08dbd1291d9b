//! Empirical strong convergence rate on nested grids.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{loglog_fit, paired_stats, PairedStats};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::schemes::{CoefficientSet, InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

/// Reference grid has this many times the steps of the finest grid tested.
pub const REFERENCE_FACTOR: usize = 4;

/// What to simulate; the grids come from the step list.
#[derive(Debug, Clone)]
pub struct RateProblem {
    pub kind: SchemeKind,
    pub coeffs: CoefficientSet,
    pub k1: Arc<dyn Kernel>,
    pub k2: Arc<dyn Kernel>,
    pub horizon: f64,
    pub init: InitialCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub h: f64,
    /// `(E max_k |X^(n)_{t_k} - X^(ref)_{t_k}|^p)^(1/p)`.
    pub error: f64,
    /// Delta-method standard error of `error`.
    pub error_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub scheme: SchemeKind,
    pub p: f64,
    pub num_paths: usize,
    pub master_seed: u64,
    pub reference_n: usize,
    pub points: Vec<RatePoint>,
    /// Least-squares slope of `log e(n)` against `log h`, i.e. the observed
    /// order of convergence.
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// 95% interval combining regression and Monte Carlo error.
    pub slope_ci: (f64, f64),
}

/// Strong errors of the grids in `n_list` against a reference with
/// `4 * max(n_list)` steps, all driven by one fine noise plan per path.
///
/// Coarse plans come from [`crate::schemes::NoisePlan::coarsen`]: summed
/// Brownian increments for K-discrete, summed fine blocks for K-integrated.
/// Both are exact pathwise couplings.
pub fn convergence_rate(
    problem: &RateProblem,
    p: f64,
    n_list: &[usize],
    num_paths: usize,
    master_seed: u64,
) -> Result<RateReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("moment order p must be >= 1, got {p}")));
    }
    if n_list.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: n_list.len(),
        });
    }
    if num_paths < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: num_paths,
        });
    }
    for w in n_list.windows(2) {
        if w[0] == 0 || w[1] <= w[0] || w[1] % w[0] != 0 {
            return Err(Error::Coupling(format!(
                "step counts must increase and each divide the next, got {n_list:?}"
            )));
        }
    }
    let n_ref = REFERENCE_FACTOR * n_list[n_list.len() - 1];
    let fine_grid = TimeGrid::new(n_ref, problem.horizon)?;
    let build = |grid: TimeGrid| {
        VolterraScheme::new(problem.kind, grid, problem.coeffs.clone(), problem.k1.clone(), problem.k2.clone())
    };
    let fine = build(fine_grid)?;
    let coarse = n_list
        .iter()
        .map(|n| {
            let g = TimeGrid::new(*n, problem.horizon)?;
            if g.refinement_ratio(&fine_grid).is_none() {
                return Err(Error::Coupling(format!("{n} steps do not nest in {n_ref}")));
            }
            build(g)
        })
        .collect::<Result<Vec<_>>>()?;
    problem.init.validate(fine.dim_d())?;
    let d = fine.dim_d();

    // per path: max-over-grid error^p for every coarse grid
    let per_path: Vec<Result<Vec<f64>>> = (0..num_paths as u64)
        .into_par_iter()
        .map(|path| {
            let x0 = fine.sample_initial(&problem.init, master_seed, path);
            let plan = fine.sample_noise(master_seed, path);
            let mut reference = vec![0.0; (n_ref + 1) * d];
            fine.run_with_plan(path, &x0, &plan, &mut reference)?;
            let mut errs = Vec::with_capacity(coarse.len());
            for scheme in &coarse {
                let n = scheme.grid.n;
                let ratio = n_ref / n;
                let cplan = plan.coarsen(ratio)?;
                let mut out = vec![0.0; (n + 1) * d];
                scheme.run_with_plan(path, &x0, &cplan, &mut out)?;
                let mut worst = 0.0f64;
                for k in 0..=n {
                    let a = &out[k * d..(k + 1) * d];
                    let r = &reference[k * ratio * d..(k * ratio + 1) * d];
                    let dist = a.iter().zip(r).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                    worst = worst.max(dist);
                }
                errs.push(worst.powf(p));
            }
            Ok(errs)
        })
        .collect();
    let mut columns = vec![Vec::with_capacity(num_paths); n_list.len()];
    for r in per_path {
        for (c, v) in columns.iter_mut().zip(r?) {
            c.push(v);
        }
    }

    let mut points = Vec::with_capacity(n_list.len());
    for (n, col) in n_list.iter().zip(&columns) {
        let PairedStats { mean, se: se_mean, .. } = paired_stats(col)?;
        let error = mean.powf(1.0 / p);
        let error_se = if mean > 0.0 { error * se_mean / (p * mean) } else { 0.0 };
        points.push(RatePoint {
            n: *n,
            h: problem.horizon / *n as f64,
            error,
            error_se,
        });
    }
    let hs: Vec<f64> = points.iter().map(|pt| pt.h).collect();
    let es: Vec<f64> = points.iter().map(|pt| pt.error).collect();
    let fit = loglog_fit(&hs, &es)?;
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mc_var: f64 = lx
        .iter()
        .zip(&points)
        .map(|(x, pt)| ((x - mx) / sxx).powi(2) * (pt.error_se / pt.error).powi(2))
        .sum();
    let se = (fit.slope_se * fit.slope_se + mc_var).sqrt();
    Ok(RateReport {
        scheme: problem.kind,
        p,
        num_paths,
        master_seed,
        reference_n: n_ref,
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_se: se,
        slope_ci: (fit.slope - 1.96 * se, fit.slope + 1.96 * se),
    })
}

/// `n, h, error, error_se` rows with 17 significant digits.
pub fn rate_csv(report: &RateReport) -> String {
    let mut s = String::from("n,h,error,error_se\n");
    for pt in &report.points {
        s.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", pt.n, pt.h, pt.error, pt.error_se));
    }
    s
}
