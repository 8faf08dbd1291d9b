use std::sync::Arc;

use rayon::prelude::*;

use crate::engine::{substream_for, StreamPurpose};
use crate::error::{Error, Result};
use crate::kernels::{build_drift_weights, GridCellIntegrals, Kernel, KernelRole};

use super::batch::PathBatch;
use super::coeffs::{CoefficientSet, InitialCondition};
use super::grid::{SchemeKind, TimeGrid};
use super::noise::{NoisePlan, NoiseWeights};

/// States whose Euclidean norm exceeds this abort the simulation.
pub const DEFAULT_BLOWUP_CAP: f64 = 1e12;

/// Precomputed drift weights and noise factors of one scheme on one grid.
#[derive(Debug, Clone)]
pub struct SchemeWeights {
    pub drift: GridCellIntegrals,
    pub noise: NoiseWeights,
}

/// One simulated path with everything needed to replay it.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub path_index: u64,
    /// Grid values, `(n + 1) × d` row-major; row 0 is `X_0`.
    pub values: Vec<f64>,
    pub noise: NoisePlan,
}

/// An Euler scheme bound to coefficients, kernels and a grid.
#[derive(Debug, Clone)]
pub struct VolterraScheme {
    pub kind: SchemeKind,
    pub grid: TimeGrid,
    pub coeffs: CoefficientSet,
    pub k1: Arc<dyn Kernel>,
    pub k2: Arc<dyn Kernel>,
    pub weights: Arc<SchemeWeights>,
    pub blowup_cap: f64,
}

impl VolterraScheme {
    pub fn new(
        kind: SchemeKind,
        grid: TimeGrid,
        coeffs: CoefficientSet,
        k1: Arc<dyn Kernel>,
        k2: Arc<dyn Kernel>,
    ) -> Result<Self> {
        grid.validate()?;
        k1.validate(KernelRole::Drift)?;
        k2.validate(KernelRole::Diffusion)?;
        let drift = build_drift_weights(k1.as_ref(), &grid, kind)?;
        let noise = NoiseWeights::build(k2.as_ref(), &grid, kind)?;
        Ok(Self {
            kind,
            grid,
            coeffs,
            k1,
            k2,
            weights: Arc::new(SchemeWeights { drift, noise }),
            blowup_cap: DEFAULT_BLOWUP_CAP,
        })
    }

    /// Same kernels and weights with other coefficients, for coupled pairs.
    pub fn with_coefficients(&self, coeffs: CoefficientSet) -> Self {
        Self { coeffs, ..self.clone() }
    }

    pub fn with_blowup_cap(mut self, cap: f64) -> Self {
        self.blowup_cap = cap;
        self
    }

    pub fn dim_d(&self) -> usize {
        self.coeffs.dim_d
    }

    /// Draws the noise plan of path `path_index`.
    pub fn sample_noise(&self, master_seed: u64, path_index: u64) -> NoisePlan {
        let mut rng = substream_for(master_seed, path_index, StreamPurpose::Noise);
        NoisePlan::sample(&self.weights.noise, &self.grid, self.coeffs.dim_q, &mut rng)
    }

    /// Draws `X_0` of path `path_index`.
    pub fn sample_initial(&self, init: &InitialCondition, master_seed: u64, path_index: u64) -> Vec<f64> {
        let mut rng = substream_for(master_seed, path_index, StreamPurpose::InitialCondition);
        let mut x0 = vec![0.0; self.dim_d()];
        init.sample(&mut rng, &mut x0);
        x0
    }

    pub(crate) fn check_plan(&self, plan: &NoisePlan) -> Result<()> {
        if plan.kind() != self.kind || plan.n() != self.grid.n || plan.q() != self.coeffs.dim_q {
            return Err(Error::GridMismatch(format!(
                "noise plan ({}, n = {}, q = {}) does not fit scheme ({}, n = {}, q = {})",
                plan.kind().as_str(),
                plan.n(),
                plan.q(),
                self.kind.as_str(),
                self.grid.n,
                self.coeffs.dim_q
            )));
        }
        Ok(())
    }

    /// Weight of `σ_c` in the increment of `X̄_{t_k}` contributed by step `l`.
    #[inline]
    pub(crate) fn noise_factor(&self, plan: &NoisePlan, k: usize, l: usize, c: usize) -> f64 {
        match (&self.weights.noise, plan) {
            (NoiseWeights::Discrete(w), NoisePlan::Discrete { .. }) => w.get(k, l) * plan.increment(l, c),
            (NoiseWeights::Integrated { .. }, NoisePlan::Integrated { .. }) => plan.block(l, c)[k - l],
            _ => unreachable!("plan kind checked against the scheme"),
        }
    }

    /// Adds the step-`l` contribution `w b + σ ξ` to `acc` (the state at
    /// `t_k`). Shared by the scheme and its companion processes so both use
    /// the same floating-point expression.
    #[inline]
    pub(crate) fn add_step(&self, plan: &NoisePlan, k: usize, l: usize, b: &[f64], s: &[f64], acc: &mut [f64]) {
        let q = self.coeffs.dim_q;
        let w = self.weights.drift.get(k, l);
        for (i, a) in acc.iter_mut().enumerate() {
            let mut v = w * b[i];
            for c in 0..q {
                v += s[i * q + c] * self.noise_factor(plan, k, l, c);
            }
            *a += v;
        }
    }

    fn check_state(&self, path: u64, step: usize, x: &[f64]) -> Result<()> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > self.blowup_cap {
            return Err(Error::NumericalBlowup {
                path,
                step,
                norm,
                cap: self.blowup_cap,
            });
        }
        Ok(())
    }

    /// Runs the recursion from `x0` on a given noise plan, writing the
    /// `(n + 1) × d` grid values into `out`.
    ///
    /// Each `X̄_{t_k}` is accumulated from `X_0` over ascending `l`.
    pub fn run_with_plan(&self, path: u64, x0: &[f64], plan: &NoisePlan, out: &mut [f64]) -> Result<()> {
        self.check_plan(plan)?;
        let n = self.grid.n;
        let d = self.dim_d();
        let q = self.coeffs.dim_q;
        if x0.len() != d || out.len() != (n + 1) * d {
            return Err(Error::Dimension(format!(
                "state buffers: x0 has {} entries, out has {}, expected {d} and {}",
                x0.len(),
                out.len(),
                (n + 1) * d
            )));
        }
        for row in out.chunks_exact_mut(d) {
            row.copy_from_slice(x0);
        }
        self.check_state(path, 0, x0)?;
        if d == 1 && q == 1 {
            return self.run_scalar(path, plan, out);
        }
        let mut b = vec![0.0; d];
        let mut s = vec![0.0; d * q];
        for l in 1..=n {
            let t = self.grid.time(l - 1);
            let (done, rest) = out.split_at_mut(l * d);
            let x = &done[(l - 1) * d..];
            self.check_state(path, l - 1, x)?;
            self.coeffs.drift_at(t, x, &mut b);
            self.coeffs.diffusion_at(t, x, &mut s);
            for (j, acc) in rest.chunks_exact_mut(d).enumerate() {
                self.add_step(plan, l + j, l, &b, &s, acc);
            }
        }
        self.check_state(path, n, &out[n * d..])
    }

    // d = q = 1; same arithmetic as `add_step`.
    fn run_scalar(&self, path: u64, plan: &NoisePlan, out: &mut [f64]) -> Result<()> {
        let n = self.grid.n;
        let drift = &self.weights.drift;
        for l in 1..=n {
            let t = self.grid.time(l - 1);
            let x = out[l - 1];
            self.check_state(path, l - 1, &[x])?;
            let b = self.coeffs.b(t, x);
            let s = self.coeffs.sigma(t, x);
            match (&self.weights.noise, plan) {
                (NoiseWeights::Discrete(w2), NoisePlan::Discrete { .. }) => {
                    let dw = plan.increment(l, 0);
                    for k in l..=n {
                        out[k] += drift.get(k, l) * b + s * (w2.get(k, l) * dw);
                    }
                }
                (NoiseWeights::Integrated { .. }, NoisePlan::Integrated { .. }) => {
                    let y = plan.block(l, 0);
                    for k in l..=n {
                        out[k] += drift.get(k, l) * b + s * y[k - l];
                    }
                }
                _ => unreachable!("plan kind checked against the scheme"),
            }
        }
        self.check_state(path, n, &out[n..])
    }

    /// Simulates path `path_index` and keeps its noise.
    pub fn simulate_path(&self, init: &InitialCondition, master_seed: u64, path_index: u64) -> Result<PathRecord> {
        let x0 = self.sample_initial(init, master_seed, path_index);
        let noise = self.sample_noise(master_seed, path_index);
        let mut values = vec![0.0; (self.grid.n + 1) * self.dim_d()];
        self.run_with_plan(path_index, &x0, &noise, &mut values)?;
        Ok(PathRecord {
            path_index,
            values,
            noise,
        })
    }

    /// Simulates `num_paths` paths in parallel. Path `p` only depends on
    /// `(master_seed, p)`, so the batch is identical for any worker count.
    pub fn simulate(&self, init: &InitialCondition, num_paths: usize, master_seed: u64) -> Result<PathBatch> {
        init.validate(self.dim_d())?;
        let row = (self.grid.n + 1) * self.dim_d();
        let mut paths = vec![0.0; num_paths * row];
        let results: Vec<Result<()>> = paths
            .par_chunks_mut(row.max(1))
            .enumerate()
            .map(|(p, out)| {
                let p = p as u64;
                let x0 = self.sample_initial(init, master_seed, p);
                let noise = self.sample_noise(master_seed, p);
                self.run_with_plan(p, &x0, &noise, out)
            })
            .collect();
        if let Some(err) = results.into_iter().find_map(|r| r.err()) {
            return Err(err);
        }
        Ok(PathBatch {
            grid: self.grid,
            dim_d: self.dim_d(),
            num_paths,
            paths,
            master_seed,
            scheme: self.kind,
            metadata: self.metadata(init),
        })
    }

    /// Description written into the JSON sidecar of a batch.
    pub fn metadata(&self, init: &InitialCondition) -> serde_json::Value {
        let factors = match &self.weights.noise {
            NoiseWeights::Integrated { summary, .. } => serde_json::to_value(summary).ok(),
            NoiseWeights::Discrete(_) => None,
        };
        serde_json::json!({
            "k1": self.k1.describe(),
            "k2": self.k2.describe(),
            "coefficients": self.coeffs.metadata,
            "dim_q": self.coeffs.dim_q,
            "initial_condition": init,
            "blowup_cap": self.blowup_cap,
            "noise_factors": factors,
        })
    }
}

/// Simulates the K-discrete scheme.
pub fn simulate_k_discrete(
    coeffs: CoefficientSet,
    k1: Arc<dyn Kernel>,
    k2: Arc<dyn Kernel>,
    grid: TimeGrid,
    init: &InitialCondition,
    num_paths: usize,
    master_seed: u64,
) -> Result<PathBatch> {
    VolterraScheme::new(SchemeKind::KDiscrete, grid, coeffs, k1, k2)?.simulate(init, num_paths, master_seed)
}

/// Simulates the K-integrated scheme.
pub fn simulate_k_integrated(
    coeffs: CoefficientSet,
    k1: Arc<dyn Kernel>,
    k2: Arc<dyn Kernel>,
    grid: TimeGrid,
    init: &InitialCondition,
    num_paths: usize,
    master_seed: u64,
) -> Result<PathBatch> {
    VolterraScheme::new(SchemeKind::KIntegrated, grid, coeffs, k1, k2)?.simulate(init, num_paths, master_seed)
}
