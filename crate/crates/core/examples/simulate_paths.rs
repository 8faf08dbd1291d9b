//! Simulates a rough mean-reverting process with both schemes and prints
//! terminal moments.

use std::sync::Arc;

use volterra::engine::moments;
use volterra::kernels::{Kernel, PowerKernel};
use volterra::schemes::{CoefficientSet, InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

fn main() -> volterra::Result<()> {
    let grid = TimeGrid::new(64, 1.0)?;
    let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(-0.3));
    let coeffs = CoefficientSet::scalar(|_, x| -x, |_, x| 0.4 + 0.2 * x.sin());
    for kind in [SchemeKind::KDiscrete, SchemeKind::KIntegrated] {
        let scheme = VolterraScheme::new(kind, grid, coeffs.clone(), k.clone(), k.clone())?;
        let batch = scheme.simulate(&InitialCondition::point(0.5), 20_000, 7)?;
        let m = moments(&batch.column(64))?;
        println!(
            "{kind:?}: mean {:.5} ± {:.5}, variance {:.5} ± {:.5}",
            m.mean, (m.variance / m.n as f64).sqrt(), m.variance, m.variance_se
        );
    }
    Ok(())
}
