//! VIX premium of a quadratic rough Heston model as the vol-of-vol grows.

use volterra::models::{qrh_coefficients, vix_paired_difference, vix_premium, QuadraticRoughHeston, TargetCurve};
use volterra::schemes::{InitialCondition, SchemeKind, TimeGrid, VolterraScheme};

fn main() -> volterra::Result<()> {
    let base = QuadraticRoughHeston {
        a: 0.384,
        b_center: 0.095,
        c: 0.0025,
        hurst: 0.1,
        lambda: 1.2,
        sigma_vol: 0.0,
        f: TargetCurve::constant(0.1),
        z0: 0.1,
    };
    let grid = TimeGrid::new(32, 1.0 / 12.0)?;
    let mut prev = None;
    for sigma_vol in [0.05, 0.1, 0.2] {
        let m = base.with_sigma_vol(sigma_vol);
        let setup = qrh_coefficients(&m)?;
        let scheme = VolterraScheme::new(SchemeKind::KDiscrete, grid, setup.coeffs, setup.k1, setup.k2)?;
        let batch = scheme.simulate(&InitialCondition::point(m.z0), 20_000, 11)?;
        let est = vix_premium(&batch, &m)?;
        print!("sigma_vol {sigma_vol:.2}: premium {:.6} ± {:.6}", est.estimate, est.se);
        if let Some((pm, pb)) = &prev {
            let d = vix_paired_difference(pb, pm, &batch, &m)?;
            print!(", increase {:.2e} ± {:.1e}", d.mean, d.se);
        }
        println!();
        prev = Some((m, batch));
    }
    Ok(())
}
