//! Paired Monte Carlo test of a convex-order conclusion.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{paired_stats, PairedStats};
use crate::error::{Error, Result};
use crate::models::{ConvexFunctionalFamily, ConvexTag, OrderKind, PathFunctional};
use crate::schemes::{InitialCondition, PathBatch, VolterraScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum McVerdict {
    Consistent,
    Violated,
}

/// Estimate of `E F(Y) - E F(X)` for one functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub functional: String,
    pub tag: ConvexTag,
    pub delta_hat: f64,
    pub se: f64,
    pub num_paths: usize,
    pub z: f64,
    pub verdict: McVerdict,
}

/// Paired differences `F(Y_p) - F(X_p)` over the admissible members of
/// `family`. A functional is violated iff `delta_hat < -z * se`.
pub fn mc_order_test(
    x: &PathBatch,
    y: &PathBatch,
    family: &ConvexFunctionalFamily,
    order: OrderKind,
    z: f64,
) -> Result<Vec<OrderReport>> {
    x.check_compatible(y)?;
    if x.dim_d != 1 {
        return Err(Error::Dimension("path functionals need d = 1".into()));
    }
    if x.num_paths < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.num_paths,
        });
    }
    if !(z >= 0.0) {
        return Err(Error::Parameter(format!("z must be nonnegative, got {z}")));
    }
    let members = family.filter(order);
    if members.is_empty() {
        return Err(Error::Parameter(format!("no functional of the family admits {order:?}")));
    }
    members.into_iter().map(|f| one_functional(x, y, f, z)).collect()
}

fn one_functional(x: &PathBatch, y: &PathBatch, f: &PathFunctional, z: f64) -> Result<OrderReport> {
    let grid = x.grid;
    let diffs: Vec<f64> = (0..x.num_paths)
        .into_par_iter()
        .map(|p| f.eval(y.path(p), &grid) - f.eval(x.path(p), &grid))
        .collect();
    let PairedStats { mean, se, n } = paired_stats(&diffs)?;
    Ok(OrderReport {
        functional: f.id.clone(),
        tag: f.tag,
        delta_hat: mean,
        se,
        num_paths: n,
        z,
        verdict: if mean < -z * se {
            McVerdict::Violated
        } else {
            McVerdict::Consistent
        },
    })
}

/// Simulates both sides with the same master seed, so path `p` of each batch
/// consumes the same raw normals.
pub fn simulate_coupled(
    x: &VolterraScheme,
    init_x: &InitialCondition,
    y: &VolterraScheme,
    init_y: &InitialCondition,
    num_paths: usize,
    master_seed: u64,
) -> Result<(PathBatch, PathBatch)> {
    if x.grid != y.grid || x.kind != y.kind {
        return Err(Error::GridMismatch(format!(
            "coupled schemes differ: {:?}/{:?} vs {:?}/{:?}",
            x.kind, x.grid, y.kind, y.grid
        )));
    }
    Ok((x.simulate(init_x, num_paths, master_seed)?, y.simulate(init_y, num_paths, master_seed)?))
}

/// True iff any report is a violation.
pub fn any_violated(reports: &[OrderReport]) -> bool {
    reports.iter().any(|r| r.verdict == McVerdict::Violated)
}

/// Fixed-width text table of the reports.
pub fn format_table(reports: &[OrderReport]) -> String {
    let mut out = format!(
        "{:<28} {:>14} {:>12} {:>8} {:>10}\n",
        "functional", "delta_hat", "se", "paths", "verdict"
    );
    for r in reports {
        let v = match r.verdict {
            McVerdict::Consistent => "ok",
            McVerdict::Violated => "VIOLATED",
        };
        out.push_str(&format!(
            "{:<28} {:>14.6e} {:>12.4e} {:>8} {:>10}\n",
            r.functional, r.delta_hat, r.se, r.num_paths, v
        ));
    }
    out
}
