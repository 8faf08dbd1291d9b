//! Monte Carlo convex-order test between two processes that differ only in
//! the size of their diffusion coefficient.

use std::sync::Arc;

use volterra::kernels::{Kernel, PowerKernel};
use volterra::models::{ConvexFunctionalFamily, OrderKind};
use volterra::ordering::{any_violated, format_table, mc_order_test, simulate_coupled};
use volterra::schemes::{CoefficientSet, InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

fn main() -> volterra::Result<()> {
    let grid = TimeGrid::new(32, 1.0)?;
    let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.2));
    let drift = |_: f64, x: f64| 0.1 - 0.5 * x;
    let x = VolterraScheme::new(
        SchemeKind::KIntegrated,
        grid,
        CoefficientSet::scalar(drift, |_, x| 0.5 * (1.0 + x.abs())),
        k.clone(),
        k,
    )?;
    let y = x.with_coefficients(CoefficientSet::scalar(drift, |_, x| 1.0 + x.abs()));
    let init = InitialCondition::point(0.0);
    let (bx, by) = simulate_coupled(&x, &init, &y, &init, 50_000, 3)?;
    let family = ConvexFunctionalFamily::standard(&[-0.5, 0.0, 0.5]);
    let reports = mc_order_test(&bx, &by, &family, OrderKind::Cvx, 4.0)?;
    print!("{}", format_table(&reports));
    println!("violation detected: {}", any_violated(&reports));
    Ok(())
}
