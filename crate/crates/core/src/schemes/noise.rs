use serde::Serialize;

use crate::engine::rng::NormalStream;
use crate::error::{Error, Result};
use crate::kernels::{build_cov_matrices, build_discrete_noise_weights, CovarianceMatrices, Kernel, WeightTable};
use crate::matrixlab::{cholesky_lower, factor_psd, FactorMethod, DEFAULT_TOL};

use super::grid::{SchemeKind, TimeGrid};

/// Square factor of one step covariance, row-major.
#[derive(Debug, Clone)]
struct StepFactor {
    m: usize,
    lower: bool,
    data: Vec<f64>,
}

/// Factors `T^(l)` with `T^(l) T^(l)* = Σ^(l)`.
#[derive(Debug, Clone)]
pub enum StepFactors {
    /// Cholesky factor of `Σ^(1)` for a stationary kernel; `T^(l)` is its
    /// leading `(n-l+1)` block. Row-major `n × n`.
    SharedCholesky { n: usize, lower: Vec<f64> },
    /// One factor per step.
    PerStep(Vec<StepFactorView>),
}

/// Public view of a per-step factor.
#[derive(Debug, Clone)]
pub struct StepFactorView(StepFactor);

/// Summary of how the step covariances were factored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorSummary {
    pub cholesky: usize,
    pub symmetric_sqrt: usize,
    pub max_reconstruction_error: f64,
}

impl StepFactors {
    /// Factors every `Σ^(l)`.
    pub fn build(cov: &CovarianceMatrices) -> Result<(Self, FactorSummary)> {
        let n = cov.n();
        if let CovarianceMatrices::Shared(full) = cov {
            if let Some(l) = cholesky_lower(full) {
                let err = (&l * l.transpose() - full).norm();
                if err <= 1e-8 * (1.0 + full.norm()) {
                    let mut lower = vec![0.0; n * n];
                    for i in 0..n {
                        for j in 0..=i {
                            lower[i * n + j] = l[(i, j)];
                        }
                    }
                    let summary = FactorSummary {
                        cholesky: n,
                        symmetric_sqrt: 0,
                        max_reconstruction_error: err,
                    };
                    return Ok((StepFactors::SharedCholesky { n, lower }, summary));
                }
            }
        }
        let mut summary = FactorSummary {
            cholesky: 0,
            symmetric_sqrt: 0,
            max_reconstruction_error: 0.0,
        };
        let mut out = Vec::with_capacity(n);
        for l in 1..=n {
            let sigma = cov.sigma(l);
            let f = factor_psd(&sigma, DEFAULT_TOL)?;
            let m = f.matrix_dim;
            let mut data = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    data[i * m + j] = f.factor[(i, j)];
                }
            }
            let lower = f.method == FactorMethod::Cholesky;
            match f.method {
                FactorMethod::Cholesky => summary.cholesky += 1,
                FactorMethod::SymmetricSqrt => summary.symmetric_sqrt += 1,
            }
            summary.max_reconstruction_error = summary.max_reconstruction_error.max(f.reconstruction_error);
            out.push(StepFactorView(StepFactor { m, lower, data }));
        }
        Ok((StepFactors::PerStep(out), summary))
    }

    /// `out = T^(l) z` with `z, out` of length `n - l + 1`.
    #[inline]
    pub fn apply(&self, l: usize, z: &[f64], out: &mut [f64]) {
        match self {
            StepFactors::SharedCholesky { n, lower } => {
                let m = n - l + 1;
                for i in 0..m {
                    let row = &lower[i * n..i * n + i + 1];
                    out[i] = dot(row, &z[..=i]);
                }
            }
            StepFactors::PerStep(v) => {
                let f = &v[l - 1].0;
                let m = f.m;
                for i in 0..m {
                    let row = &f.data[i * m..(i + 1) * m];
                    out[i] = if f.lower { dot(&row[..=i], &z[..=i]) } else { dot(row, z) };
                }
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Noise weights of one scheme on one grid.
#[derive(Debug, Clone)]
pub enum NoiseWeights {
    /// `K_2(t_k, t_{l-1})`.
    Discrete(WeightTable),
    /// Factors of the step covariances.
    Integrated {
        factors: StepFactors,
        summary: FactorSummary,
    },
}

impl NoiseWeights {
    pub fn build(kernel2: &dyn Kernel, grid: &TimeGrid, kind: SchemeKind) -> Result<Self> {
        match kind {
            SchemeKind::KDiscrete => Ok(NoiseWeights::Discrete(build_discrete_noise_weights(kernel2, grid)?)),
            SchemeKind::KIntegrated => {
                let cov = build_cov_matrices(kernel2, grid)?;
                let (factors, summary) = StepFactors::build(&cov)?;
                Ok(NoiseWeights::Integrated { factors, summary })
            }
        }
    }
}

/// Per-path Gaussian input of a scheme.
///
/// K-discrete: Brownian increments `W_{t_l} - W_{t_{l-1}}`, `q` per step.
/// K-integrated: blocks `Y^(l)`, for each driver coordinate `n - l + 1` values
/// `∫_{t_{l-1}}^{t_l} K_2(t_k, s) dW_s`, `k = l..n`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoisePlan {
    Discrete { n: usize, q: usize, increments: Vec<f64> },
    Integrated { n: usize, q: usize, blocks: Vec<f64> },
}

/// Offset of step `l` (1-based) in the integrated block layout.
#[inline]
pub(crate) fn block_offset(n: usize, q: usize, l: usize) -> usize {
    let j = l - 1;
    q * (j * n - j * j.saturating_sub(1) / 2)
}

impl NoisePlan {
    /// Draws the plan of one path. The stream is consumed in step order:
    /// `q` normals per step for K-discrete, `q (n - l + 1)` for K-integrated.
    pub fn sample(weights: &NoiseWeights, grid: &TimeGrid, q: usize, rng: &mut NormalStream) -> Self {
        let n = grid.n;
        match weights {
            NoiseWeights::Discrete(_) => {
                let sh = grid.step().sqrt();
                let increments = (0..n * q).map(|_| sh * rng.next_normal()).collect();
                NoisePlan::Discrete { n, q, increments }
            }
            NoiseWeights::Integrated { factors, .. } => {
                let total = block_offset(n, q, n + 1);
                let mut blocks = vec![0.0; total];
                let mut z = vec![0.0; n];
                for l in 1..=n {
                    let m = n - l + 1;
                    let base = block_offset(n, q, l);
                    for c in 0..q {
                        rng.fill_normals(&mut z[..m]);
                        let out = &mut blocks[base + c * m..base + (c + 1) * m];
                        factors.apply(l, &z[..m], out);
                    }
                }
                NoisePlan::Integrated { n, q, blocks }
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            NoisePlan::Discrete { n, .. } | NoisePlan::Integrated { n, .. } => *n,
        }
    }

    pub fn q(&self) -> usize {
        match self {
            NoisePlan::Discrete { q, .. } | NoisePlan::Integrated { q, .. } => *q,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            NoisePlan::Discrete { .. } => SchemeKind::KDiscrete,
            NoisePlan::Integrated { .. } => SchemeKind::KIntegrated,
        }
    }

    /// Brownian increment of coordinate `c` over step `l` (K-discrete).
    #[inline]
    pub fn increment(&self, l: usize, c: usize) -> f64 {
        match self {
            NoisePlan::Discrete { q, increments, .. } => increments[(l - 1) * q + c],
            NoisePlan::Integrated { .. } => panic!("increment() on a K-integrated plan"),
        }
    }

    /// Block `Y^(l)` of coordinate `c`, indexed by `k - l` (K-integrated).
    #[inline]
    pub fn block(&self, l: usize, c: usize) -> &[f64] {
        match self {
            NoisePlan::Integrated { n, q, blocks } => {
                let m = n - l + 1;
                let base = block_offset(*n, *q, l) + c * m;
                &blocks[base..base + m]
            }
            NoisePlan::Discrete { .. } => panic!("block() on a K-discrete plan"),
        }
    }

    /// Plan on the coarse grid with `n / ratio` steps driven by the same
    /// Brownian motion.
    ///
    /// Increments add up over the fine cells of each coarse cell. For
    /// K-integrated blocks, coarse times are fine times, so
    /// `Y^(L)_K = Σ_{j ∈ L} Y^(j)_{ratio K}` over the fine cells `j` of `L`.
    pub fn coarsen(&self, ratio: usize) -> Result<NoisePlan> {
        let n = self.n();
        let q = self.q();
        if ratio == 0 || n % ratio != 0 {
            return Err(Error::Coupling(format!("{n} steps cannot be coarsened by {ratio}")));
        }
        let nc = n / ratio;
        match self {
            NoisePlan::Discrete { increments, .. } => {
                let mut out = vec![0.0; nc * q];
                for big in 0..nc {
                    for c in 0..q {
                        let mut s = 0.0;
                        for j in big * ratio..(big + 1) * ratio {
                            s += increments[j * q + c];
                        }
                        out[big * q + c] = s;
                    }
                }
                Ok(NoisePlan::Discrete { n: nc, q, increments: out })
            }
            NoisePlan::Integrated { .. } => {
                let mut blocks = vec![0.0; block_offset(nc, q, nc + 1)];
                for big_l in 1..=nc {
                    let mc = nc - big_l + 1;
                    let base = block_offset(nc, q, big_l);
                    for c in 0..q {
                        for big_k in big_l..=nc {
                            let mut s = 0.0;
                            for j in (big_l - 1) * ratio + 1..=big_l * ratio {
                                s += self.block(j, c)[ratio * big_k - j];
                            }
                            blocks[base + c * mc + (big_k - big_l)] = s;
                        }
                    }
                }
                Ok(NoisePlan::Integrated { n: nc, q, blocks })
            }
        }
    }
}
