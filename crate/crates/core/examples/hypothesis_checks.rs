//! Sample-based checks of the comparison hypotheses for a pair of models.

use volterra::kernels::PowerKernel;
use volterra::models::OrderKind;
use volterra::ordering::{
    check_c_sigma, check_ck2, check_conv_sigma, check_drift_compare, check_initial_order, DriftDirection,
    DriftVariant, SamplerConfig,
};
use volterra::schemes::{CoefficientSet, InitialCondition};

fn main() -> volterra::Result<()> {
    let cfg = SamplerConfig { samples: 500, ..SamplerConfig::default() };
    let (k, kt) = (PowerKernel::new(-0.2), PowerKernel::new(-0.2));
    let x = CoefficientSet::scalar(|_, x| -x, |_, x| 0.5 * (1.0 + x.abs()));
    let y = CoefficientSet::scalar(|_, x| 0.2 - x, |_, x| x.abs().sqrt());
    let reports = [
        check_c_sigma(&x, &y, &cfg)?,
        check_ck2(&k, &kt, &cfg)?,
        check_conv_sigma(&x, &cfg)?,
        check_conv_sigma(&y, &cfg)?,
        check_drift_compare(&x, &k, &y, &kt, DriftDirection::Icv, DriftVariant::Disc, &cfg)?,
        check_initial_order(
            &InitialCondition::point(0.0),
            &InitialCondition::Uniform { lo: vec![-0.5], hi: vec![0.5] },
            OrderKind::Cvx,
            201,
            cfg.tol,
        )?,
    ];
    for r in &reports {
        println!("{:<16} {:?} after {} samples", format!("{:?}", r.condition), r.verdict, r.samples_checked);
        if let Some(w) = &r.witness {
            println!("  witness: times {:?}, points {:?}, violation {:.3e}", w.times, w.points, w.violation);
        }
    }
    Ok(())
}
