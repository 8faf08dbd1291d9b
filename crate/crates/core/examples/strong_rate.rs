//! Empirical strong convergence rate against a refined reference solution.

use std::sync::Arc;

use volterra::kernels::{Kernel, PowerKernel};
use volterra::ordering::{convergence_rate, rate_csv, RateProblem};
use volterra::schemes::{CoefficientSet, InitialCondition, SchemeKind};

fn main() -> volterra::Result<()> {
    let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.2));
    let problem = RateProblem {
        kind: SchemeKind::KIntegrated,
        coeffs: CoefficientSet::scalar(|_, x| -x, |_, x| 0.4 + 0.2 * x.sin()),
        k1: k.clone(),
        k2: k,
        horizon: 1.0,
        init: InitialCondition::point(0.0),
    };
    let r = convergence_rate(&problem, 2.0, &[8, 16, 32, 64], 500, 5)?;
    print!("{}", rate_csv(&r));
    println!("slope {:.3} (95% CI {:.3}..{:.3})", r.slope, r.slope_ci.0, r.slope_ci.1);
    Ok(())
}
