use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::rng::NormalStream;
use crate::engine::{substream_for, StreamPurpose};
use crate::error::{Error, Result};

/// `(t, x, out)` writes `b(t, x) ∈ R^d` into `out`.
pub type DriftFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
/// `(t, x, out)` writes `σ(t, x) ∈ R^{d×q}` row-major into `out`.
pub type DiffusionFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
/// `(t, out)` writes a time-dependent vector or matrix into `out`.
pub type TimeFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// Declared affine structure `b(t, x) = μ(t) + ν(t) x`.
#[derive(Clone)]
pub struct AffineDrift {
    /// `μ(t) ∈ R^d`.
    pub mu: Arc<TimeFn>,
    /// `ν(t) ∈ R^{d×d}`, row-major.
    pub nu: Arc<TimeFn>,
}

/// Drift and diffusion coefficients with their structural flags.
#[derive(Clone)]
pub struct CoefficientSet {
    pub dim_d: usize,
    pub dim_q: usize,
    drift: Arc<DriftFn>,
    diffusion: Arc<DiffusionFn>,
    pub affine: Option<AffineDrift>,
    /// For `d = q = 1`: `x ↦ |σ(t, x)|` declared convex.
    pub scalar_monotone_convex: bool,
    pub metadata: serde_json::Value,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("dim_d", &self.dim_d)
            .field("dim_q", &self.dim_q)
            .field("affine", &self.affine.is_some())
            .field("scalar_monotone_convex", &self.scalar_monotone_convex)
            .field("metadata", &self.metadata)
            .finish()
    }
}

impl CoefficientSet {
    pub fn new(
        dim_d: usize,
        dim_q: usize,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim_d == 0 || dim_q == 0 {
            return Err(Error::Dimension(format!(
                "state and driver dimensions must be positive (d = {dim_d}, q = {dim_q})"
            )));
        }
        Ok(Self {
            dim_d,
            dim_q,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            affine: None,
            scalar_monotone_convex: false,
            metadata: serde_json::Value::Null,
        })
    }

    /// One-dimensional coefficients `b(t, x)` and `σ(t, x)`.
    pub fn scalar(
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            1,
            1,
            move |t, x, out| out[0] = drift(t, x[0]),
            move |t, x, out| out[0] = diffusion(t, x[0]),
        )
        .expect("scalar dimensions are valid")
    }

    /// One-dimensional coefficients with affine drift `μ(t) + ν(t) x`.
    pub fn affine_scalar(
        mu: impl Fn(f64) -> f64 + Send + Sync + 'static,
        nu: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let mu = Arc::new(mu);
        let nu = Arc::new(nu);
        let (m, v) = (mu.clone(), nu.clone());
        let mut c = Self::scalar(move |t, x| m(t) + v(t) * x, diffusion);
        c.affine = Some(AffineDrift {
            mu: Arc::new(move |t, out| out[0] = mu(t)),
            nu: Arc::new(move |t, out| out[0] = nu(t)),
        });
        c
    }

    /// Declares `x ↦ |σ(t, x)|` convex (`d = q = 1` only).
    pub fn with_monotone_convex_flag(mut self) -> Result<Self> {
        if self.dim_d != 1 || self.dim_q != 1 {
            return Err(Error::Dimension("the convex |σ| flag needs d = q = 1".into()));
        }
        self.scalar_monotone_convex = true;
        Ok(self)
    }

    pub fn with_affine(mut self, affine: AffineDrift) -> Self {
        self.affine = Some(affine);
        self
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = metadata;
        self
    }

    #[inline]
    pub fn drift_at(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out)
    }

    #[inline]
    pub fn diffusion_at(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(t, x, out)
    }

    /// Scalar drift for `d = 1`.
    pub fn b(&self, t: f64, x: f64) -> f64 {
        let mut out = [0.0];
        self.drift_at(t, &[x], &mut out);
        out[0]
    }

    /// Scalar diffusion for `d = q = 1`.
    pub fn sigma(&self, t: f64, x: f64) -> f64 {
        let mut out = [0.0];
        self.diffusion_at(t, &[x], &mut out);
        out[0]
    }

    /// Checks a declared affine drift on `samples` random `(t, x)` points in
    /// `[0, horizon] × [-radius, radius]^d`, to `1e-12` relative.
    pub fn verify_affine(&self, horizon: f64, radius: f64, samples: usize, seed: u64) -> Result<()> {
        let Some(aff) = &self.affine else {
            return Err(Error::Parameter("coefficients declare no affine drift".into()));
        };
        let d = self.dim_d;
        let mut rng: NormalStream = substream_for(seed, 0, StreamPurpose::Checker);
        let (mut x, mut b, mut mu, mut nu) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d * d]);
        for i in 0..samples {
            let t = horizon * rng.next_uniform();
            for v in x.iter_mut() {
                *v = radius * (2.0 * rng.next_uniform() - 1.0);
            }
            self.drift_at(t, &x, &mut b);
            (aff.mu)(t, &mut mu);
            (aff.nu)(t, &mut nu);
            for r in 0..d {
                let mut expect = mu[r];
                for c in 0..d {
                    expect += nu[r * d + c] * x[c];
                }
                let scale = 1.0 + expect.abs() + b[r].abs();
                if (b[r] - expect).abs() > 1e-12 * scale {
                    return Err(Error::Parameter(format!(
                        "drift is not affine at sample {i} (t = {t}, x = {x:?}): b = {}, μ + νx = {expect}",
                        b[r]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Law of the initial condition `X_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Point { value: Vec<f64> },
    /// Independent coordinates `N(mean_i, std_i^2)`.
    Gaussian { mean: Vec<f64>, std: Vec<f64> },
    /// Independent coordinates uniform on `[lo_i, hi_i]`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
}

impl InitialCondition {
    pub fn point(value: f64) -> Self {
        InitialCondition::Point { value: vec![value] }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialCondition::Point { value } => value.len(),
            InitialCondition::Gaussian { mean, .. } => mean.len(),
            InitialCondition::Uniform { lo, .. } => lo.len(),
        }
    }

    pub fn validate(&self, dim_d: usize) -> Result<()> {
        let ok = match self {
            InitialCondition::Point { value } => value.len() == dim_d && value.iter().all(|v| v.is_finite()),
            InitialCondition::Gaussian { mean, std } => {
                mean.len() == dim_d && std.len() == dim_d && std.iter().all(|s| *s >= 0.0 && s.is_finite())
            }
            InitialCondition::Uniform { lo, hi } => {
                lo.len() == dim_d && hi.len() == dim_d && lo.iter().zip(hi).all(|(a, b)| a <= b)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("initial condition {self:?} invalid for d = {dim_d}")))
        }
    }

    /// Draws `X_0` for one path.
    pub fn sample(&self, rng: &mut NormalStream, out: &mut [f64]) {
        match self {
            InitialCondition::Point { value } => out.copy_from_slice(value),
            InitialCondition::Gaussian { mean, std } => {
                for ((o, m), s) in out.iter_mut().zip(mean).zip(std) {
                    *o = m + s * rng.next_normal();
                }
            }
            InitialCondition::Uniform { lo, hi } => {
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = a + (b - a) * rng.next_uniform();
                }
            }
        }
    }

    /// Whether every path starts from the same deterministic state.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, InitialCondition::Point { .. })
    }
}
