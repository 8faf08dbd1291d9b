use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::engine::RunManifest;
use crate::error::{Error, Result};
use crate::models::{vix_paired_difference, vix_premium, OrderKind};
use crate::ordering::{
    any_violated, check_c_sigma, check_ck2, check_ck2_sigma, check_ck2_sigma_1d, check_conv_sigma,
    check_drift_compare, check_initial_order, convergence_rate, format_table, mc_order_test, rate_csv,
    simulate_coupled, Ck2SigmaVariant, ConditionId, DriftDirection, DriftVariant, OrderHypothesisReport, RateProblem,
};
use crate::schemes::VolterraScheme;

use super::config::RunConfig;

/// Process outcome of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Violation,
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let body = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(dir.join(name), body + "\n")?;
    Ok(())
}

fn manifest(command: &str, cfg: &RunConfig) -> RunManifest {
    RunManifest::new(command, cfg.master_seed, &cfg.canonical())
}

fn x_scheme(cfg: &RunConfig) -> Result<VolterraScheme> {
    let (coeffs, k1, k2) = cfg.x_side()?;
    VolterraScheme::new(cfg.scheme, cfg.grid, coeffs, k1, k2)
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<(Outcome, RunManifest)> {
    cfg.require_paths()?;
    let scheme = x_scheme(cfg)?;
    let batch = scheme.simulate(&cfg.x_init(), cfg.num_paths, cfg.master_seed)?;
    batch.export(out, "paths")?;
    Ok((Outcome::Ok, manifest("simulate", cfg)))
}

pub fn price_vix(cfg: &RunConfig, out: &Path) -> Result<(Outcome, RunManifest)> {
    cfg.require_paths()?;
    let model = cfg.model()?;
    let run = |sigma_vol: f64| -> Result<_> {
        let m = model.with_sigma_vol(sigma_vol);
        let setup = crate::models::qrh_coefficients(&m)?;
        let scheme = VolterraScheme::new(cfg.scheme, cfg.grid, setup.coeffs, setup.k1, setup.k2)?;
        let batch = scheme.simulate(&crate::schemes::InitialCondition::point(m.z0), cfg.num_paths, cfg.master_seed)?;
        Ok((m, batch))
    };
    let (m0, b0) = run(model.sigma_vol)?;
    let est = vix_premium(&b0, &m0)?;
    let mut sweep = Vec::new();
    let mut prev: Option<(crate::models::QuadraticRoughHeston, crate::schemes::PathBatch)> = None;
    for s in &cfg.vix.sigma_vol_sweep {
        let (m, b) = run(*s)?;
        let e = vix_premium(&b, &m)?;
        let diff = match &prev {
            Some((pm, pb)) if b.num_paths >= 2 => {
                let d = vix_paired_difference(pb, pm, &b, &m)?;
                json!({ "mean": d.mean, "se": d.se })
            }
            _ => serde_json::Value::Null,
        };
        sweep.push(json!({
            "sigma_vol": s,
            "estimate": e.estimate,
            "se": e.se,
            "paired_difference_from_previous": diff,
        }));
        prev = Some((m, b));
    }
    let man = manifest("price-vix", cfg);
    let report = json!({
        "estimate": est.estimate,
        "se": est.se,
        "num_paths": est.num_paths,
        "model": m0.describe(),
        "sweep": sweep,
        "manifest": man,
    });
    write_json(out, "vix.json", &report)?;
    Ok((Outcome::Ok, man))
}

/// Checker reports between `X` and `Y` of the configuration.
fn hypothesis_reports(cfg: &RunConfig) -> Result<(Vec<OrderHypothesisReport>, serde_json::Value)> {
    let sampler = cfg.sampler.sampler(cfg.grid.horizon);
    let (kx, ky) = (cfg.kernels, cfg.y_kernels());
    let (cx, cy) = (cfg.coefficients, cfg.y_coefficients());
    let (k1x, k2x) = kx.build()?;
    let (k1y, k2y) = ky.build()?;
    let (x, y) = (cx.build()?, cy.build()?);
    let (ix, iy) = (cfg.init.clone(), cfg.y_init());
    let mut out = vec![
        check_c_sigma(&x, &y, &sampler)?,
        check_ck2(k2x.as_ref(), k2y.as_ref(), &sampler)?,
        check_ck2_sigma(k2x.as_ref(), &x, k2y.as_ref(), &y, Ck2SigmaVariant::Disc, &sampler)?,
        check_ck2_sigma(k2x.as_ref(), &x, k2y.as_ref(), &y, Ck2SigmaVariant::Int, &sampler)?,
        check_ck2_sigma_1d(k2x.as_ref(), &x, k2y.as_ref(), &y, &sampler)?,
    ];
    let conv_x = check_conv_sigma(&x, &sampler)?;
    let conv_y = check_conv_sigma(&y, &sampler)?;
    let mut drift = Vec::new();
    for dir in [DriftDirection::Icv, DriftDirection::Dcv] {
        for v in [DriftVariant::Disc, DriftVariant::Int] {
            drift.push((
                v,
                check_drift_compare(&x, k1x.as_ref(), &y, k1y.as_ref(), dir, v, &sampler)?,
            ));
        }
    }
    let order = cfg.order.order;
    let init = check_initial_order(&ix, &iy, order, cfg.sampler.initial_strikes, sampler.tol)?;
    let holds = |id: ConditionId, list: &[OrderHypothesisReport]| {
        list.iter().any(|r| r.condition == id && r.holds_on_sample())
    };
    let common_k1 = kx.k1 == ky.k1;
    let common_affine = cx.drift == cy.drift && cx.drift.affine_parts().is_some();
    let conv = conv_x.holds_on_sample() || conv_y.holds_on_sample();
    let ck2s = holds(ConditionId::CK2SigmaInt, &out) || holds(ConditionId::CK2SigmaDisc, &out);
    let drift_ok = |d: DriftDirection| {
        let id = match d {
            DriftDirection::Icv => ConditionId::DriftCompareIcv,
            DriftDirection::Dcv => ConditionId::DriftCompareDcv,
        };
        drift.iter().any(|(_, r)| r.condition == id && r.holds_on_sample())
    };
    let summary = json!({
        "order": order,
        "common_k1": common_k1,
        "common_affine_drift": common_affine,
        "conv_on_either_side": conv,
        "ck2_sigma_int_or_disc": ck2s,
        "initial_order": init.holds_on_sample(),
        "drift_compare_icv": drift_ok(DriftDirection::Icv),
        "drift_compare_dcv": drift_ok(DriftDirection::Dcv),
        "cvx_hypotheses_hold_on_sample": order == OrderKind::Cvx
            && common_k1 && common_affine && conv && ck2s && init.holds_on_sample(),
    });
    out.push(tag_side(conv_x, "X"));
    out.push(tag_side(conv_y, "Y"));
    out.extend(drift.into_iter().map(|(v, r)| {
        let label = match v {
            DriftVariant::Disc => "pointwise",
            DriftVariant::Int => "cell-integrated",
        };
        tag_side(r, label)
    }));
    out.push(init);
    Ok((out, summary))
}

fn tag_side(mut r: OrderHypothesisReport, label: &str) -> OrderHypothesisReport {
    r.note = Some(match r.note.take() {
        Some(n) => format!("{label}; {n}"),
        None => label.to_string(),
    });
    r
}

pub fn check_hypotheses(cfg: &RunConfig, out: &Path) -> Result<(Outcome, RunManifest)> {
    let (reports, summary) = hypothesis_reports(cfg)?;
    let man = manifest("check-hypotheses", cfg);
    write_json(out, "hypotheses.json", &json!({ "reports": reports, "summary": summary }))?;
    Ok((Outcome::Ok, man))
}

pub fn check_order(cfg: &RunConfig, out: &Path) -> Result<(Outcome, RunManifest)> {
    cfg.require_paths()?;
    if cfg.model.is_some() {
        return Err(Error::Config("check-order compares coefficient specs; remove \"model\"".into()));
    }
    let family = cfg.order.family.build()?;
    let hyp = if cfg.order.check_hypotheses {
        let (r, s) = hypothesis_reports(cfg)?;
        json!({ "reports": r, "summary": s })
    } else {
        serde_json::Value::Null
    };
    let x = x_scheme(cfg)?;
    let (k1y, k2y) = cfg.y_kernels().build()?;
    let y = VolterraScheme::new(cfg.scheme, cfg.grid, cfg.y_coefficients().build()?, k1y, k2y)?;
    let (bx, by) = simulate_coupled(&x, &cfg.init, &y, &cfg.y_init(), cfg.num_paths, cfg.master_seed)?;
    let reports = mc_order_test(&bx, &by, &family, cfg.order.order, cfg.order.z)?;
    let violated = any_violated(&reports);
    let man = manifest("check-order", cfg);
    write_json(
        out,
        "order_report.json",
        &json!({
            "order": cfg.order.order,
            "z": cfg.order.z,
            "violated": violated,
            "functionals": reports,
            "hypotheses": hyp,
            "manifest": man,
        }),
    )?;
    std::fs::write(out.join("order_report.txt"), format_table(&reports))?;
    Ok((if violated { Outcome::Violation } else { Outcome::Ok }, man))
}

pub fn rate(cfg: &RunConfig, out: &Path) -> Result<(Outcome, RunManifest)> {
    cfg.require_paths()?;
    let (coeffs, k1, k2) = cfg.x_side()?;
    let problem = RateProblem {
        kind: cfg.scheme,
        coeffs,
        k1,
        k2,
        horizon: cfg.grid.horizon,
        init: cfg.x_init(),
    };
    let report = convergence_rate(&problem, cfg.rate.p, &cfg.rate.n_list, cfg.num_paths, cfg.master_seed)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("rate.csv"), rate_csv(&report))?;
    write_json(out, "rate.json", &report)?;
    Ok((Outcome::Ok, manifest("rate", cfg)))
}
