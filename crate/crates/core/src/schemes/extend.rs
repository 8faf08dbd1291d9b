use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::engine::rng::NormalStream;
use crate::error::{Error, Result};
use crate::kernels::build_cov_matrices;

use super::grid::{SchemeKind, TimeGrid};
use super::noise::NoisePlan;
use super::scheme::{PathRecord, VolterraScheme};

/// Piecewise-affine interpolation `i_n` of grid values `(n + 1) × d` at `t`.
pub fn interpolate(values: &[f64], dim_d: usize, grid: &TimeGrid, t: f64) -> Result<Vec<f64>> {
    if values.len() != (grid.n + 1) * dim_d {
        return Err(Error::Dimension(format!(
            "expected {} values for n = {} and d = {dim_d}, got {}",
            (grid.n + 1) * dim_d,
            grid.n,
            values.len()
        )));
    }
    let (k, on_grid) = grid.locate(t)?;
    let row = |j: usize| &values[j * dim_d..(j + 1) * dim_d];
    if on_grid || k == grid.n {
        return Ok(row(k).to_vec());
    }
    let (t0, t1) = (grid.time(k), grid.time(k + 1));
    let r = (t - t0) / (t1 - t0);
    Ok(row(k).iter().zip(row(k + 1)).map(|(a, b)| a + r * (b - a)).collect())
}

/// Conditional draw of a centred Gaussian `G` given a centred Gaussian vector
/// `y` with covariance `sigma`, `Cov(G, y) = c`, `Var(G) = v`.
fn conditional_draw(sigma: &DMatrix<f64>, c: &DVector<f64>, v: f64, y: &[f64], z: f64) -> f64 {
    let eig = SymmetricEigen::new(sigma.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cut = 1e-12 * top.max(f64::MIN_POSITIVE);
    let mut mean = 0.0;
    let mut explained = 0.0;
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        if *lam <= cut {
            continue;
        }
        let u = eig.eigenvectors.column(j);
        let cu = u.dot(c);
        let yu: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
        mean += cu * yu / lam;
        explained += cu * cu / lam;
    }
    mean + (v - explained).max(0.0).sqrt() * z
}

impl VolterraScheme {
    /// Value of the continuous-time extension of the scheme at `t`, given a
    /// simulated path. Off-grid values need fresh Gaussian variables
    /// conditioned on the path's noise; they are drawn from `rng`.
    ///
    /// K-discrete: kernels are evaluated at `(t, t_{l-1})` and the last cell
    /// uses a Brownian bridge for `W_t - W_{t_k}`.
    /// K-integrated: every `∫ K_2(t, s) dW_s` over a cell is drawn conditionally
    /// on that cell's block `Y^(l)`.
    pub fn extend_continuous(&self, record: &PathRecord, t: f64, rng: &mut NormalStream) -> Result<Vec<f64>> {
        let grid = &self.grid;
        let d = self.dim_d();
        let q = self.coeffs.dim_q;
        self.check_plan(&record.noise)?;
        let (k, on_grid) = grid.locate(t)?;
        let row = |j: usize| &record.values[j * d..(j + 1) * d];
        if on_grid {
            return Ok(row(k).to_vec());
        }
        let h = grid.step();
        let mut acc = row(0).to_vec();
        let mut b = vec![0.0; d];
        let mut s = vec![0.0; d * q];
        let mut xi = vec![0.0; q];
        let cov = match self.kind {
            SchemeKind::KIntegrated => Some(build_cov_matrices(self.k2.as_ref(), grid)?),
            SchemeKind::KDiscrete => None,
        };
        for l in 1..=k + 1 {
            let (lo, hi) = (grid.time(l - 1), if l <= k { grid.time(l) } else { t });
            let x = row(l - 1);
            self.coeffs.drift_at(lo, x, &mut b);
            self.coeffs.diffusion_at(lo, x, &mut s);
            let w1 = match self.kind {
                SchemeKind::KDiscrete => self.k1.eval(t, lo) * (hi - lo),
                SchemeKind::KIntegrated => self.k1.integral(t, lo, hi)?,
            };
            match (&record.noise, &cov) {
                (NoisePlan::Discrete { .. }, _) => {
                    let k2 = self.k2.eval(t, lo);
                    for (c, xc) in xi.iter_mut().enumerate() {
                        let dw = record.noise.increment(l, c);
                        let w = if l <= k {
                            dw
                        } else {
                            let r = (t - lo) / h;
                            r * dw + ((t - lo) * (grid.time(l) - t) / h).sqrt() * rng.next_normal()
                        };
                        *xc = k2 * w;
                    }
                }
                (NoisePlan::Integrated { n, .. }, Some(cov)) => {
                    let sigma = cov.sigma(l);
                    let m = n - l + 1;
                    let mut cvec = DVector::zeros(m);
                    for j in 0..m {
                        cvec[j] = self.k2.cross_moment(t, grid.time(l + j), lo, hi)?;
                    }
                    let v = self.k2.cross_moment(t, t, lo, hi)?;
                    for (c, xc) in xi.iter_mut().enumerate() {
                        let y = record.noise.block(l, c);
                        *xc = conditional_draw(&sigma, &cvec, v, y, rng.next_normal());
                    }
                }
                _ => unreachable!("integrated plans come with covariances"),
            }
            for i in 0..d {
                let mut v = w1 * b[i];
                for c in 0..q {
                    v += s[i * q + c] * xi[c];
                }
                acc[i] += v;
            }
        }
        Ok(acc)
    }

    /// Companion processes `X^k_{t_l}`, `0 <= l <= k <= n`, driven by the
    /// record's noise: `X^k_{t_0} = X_0` and
    /// `X^k_{t_l} = X^k_{t_{l-1}} + w_{k,l} b(t_{l-1}, X^{l-1}_{t_{l-1}}) + σ(t_{l-1}, X^{l-1}_{t_{l-1}}) ξ_{k,l}`.
    ///
    /// Entry `k` of the result holds `(k + 1) × d` values; its last row is the
    /// diagonal `X^k_{t_k}`.
    pub fn companion_paths(&self, record: &PathRecord) -> Result<Vec<Vec<f64>>> {
        let n = self.grid.n;
        let d = self.dim_d();
        let q = self.coeffs.dim_q;
        self.check_plan(&record.noise)?;
        let x0 = record.values[..d].to_vec();
        let mut coeff_b: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut coeff_s: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        out.push(x0.clone());
        for k in 1..=n {
            // coefficients at the previous diagonal value
            let diag = &out[k - 1][(k - 1) * d..k * d];
            let t = self.grid.time(k - 1);
            let mut b = vec![0.0; d];
            let mut s = vec![0.0; d * q];
            self.coeffs.drift_at(t, diag, &mut b);
            self.coeffs.diffusion_at(t, diag, &mut s);
            coeff_b.push(b);
            coeff_s.push(s);
            let mut rowk = Vec::with_capacity((k + 1) * d);
            rowk.extend_from_slice(&x0);
            let mut cur = x0.clone();
            for l in 1..=k {
                self.add_step(&record.noise, k, l, &coeff_b[l - 1], &coeff_s[l - 1], &mut cur);
                rowk.extend_from_slice(&cur);
            }
            out.push(rowk);
        }
        Ok(out)
    }
}
