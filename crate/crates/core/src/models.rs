//! Prebuilt models and path functionals: the quadratic rough Heston
//! variance driver, its VIX premium, and a family of convex test functionals.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::{paired_stats, substream_for, PairedStats, StreamPurpose};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, PowerKernel};
use crate::schemes::{CoefficientSet, PathBatch, TimeGrid};

/// Target curve `f` of the mean reversion, with its declared Hölder exponent.
#[derive(Clone)]
pub struct TargetCurve {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub holder_exponent: f64,
    pub description: serde_json::Value,
}

impl fmt::Debug for TargetCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TargetCurve({})", self.description)
    }
}

impl TargetCurve {
    pub fn constant(value: f64) -> Self {
        Self {
            f: Arc::new(move |_| value),
            holder_exponent: 1.0,
            description: serde_json::json!({ "type": "constant", "value": value }),
        }
    }

    pub fn from_fn(holder_exponent: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            holder_exponent,
            description: serde_json::json!({ "type": "custom", "holder_exponent": holder_exponent }),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

/// Auxiliary process of the quadratic rough Heston model:
/// `Z_t = z0 + ∫ (t-s)^{H-1/2} λ (f(s) - Z_s) ds + ∫ (t-s)^{H-1/2} σ_vol √(a (Z_s - b)^2 + c) dW_s`.
#[derive(Debug, Clone)]
pub struct QuadraticRoughHeston {
    pub a: f64,
    pub b_center: f64,
    pub c: f64,
    pub hurst: f64,
    pub lambda: f64,
    pub sigma_vol: f64,
    pub f: TargetCurve,
    pub z0: f64,
}

impl QuadraticRoughHeston {
    /// Checks the parameter constraints. `a = 0` and `sigma_vol = 0` are
    /// accepted as degenerate cases.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b_center, self.c, self.hurst, self.lambda, self.sigma_vol, self.z0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Parameter("model parameters must be finite".into()));
        }
        if self.a < 0.0 {
            return Err(Error::Parameter(format!("a must be nonnegative (got {})", self.a)));
        }
        if self.b_center < 0.0 {
            return Err(Error::Parameter(format!("b_center must be nonnegative (got {})", self.b_center)));
        }
        if self.c < 0.0 {
            return Err(Error::Parameter(format!("c must be nonnegative (got {})", self.c)));
        }
        if !(self.hurst > 0.0 && self.hurst < 0.5) {
            return Err(Error::Parameter(format!("H must lie in (0, 1/2) (got {})", self.hurst)));
        }
        if self.sigma_vol < 0.0 {
            return Err(Error::Parameter(format!("sigma_vol must be nonnegative (got {})", self.sigma_vol)));
        }
        Ok(())
    }

    /// `σ(z) = sigma_vol √(a (z - b)^2 + c)`.
    pub fn diffusion(&self, z: f64) -> f64 {
        self.sigma_vol * self.variance(z).sqrt()
    }

    /// `V = a (z - b)^2 + c`.
    pub fn variance(&self, z: f64) -> f64 {
        let d = z - self.b_center;
        self.a * d * d + self.c
    }

    pub fn kernel_exponent(&self) -> f64 {
        self.hurst - 0.5
    }

    pub fn with_sigma_vol(&self, sigma_vol: f64) -> Self {
        Self {
            sigma_vol,
            ..self.clone()
        }
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "a": self.a,
            "b_center": self.b_center,
            "c": self.c,
            "H": self.hurst,
            "lambda": self.lambda,
            "sigma_vol": self.sigma_vol,
            "f": self.f.description,
            "z0": self.z0,
        })
    }
}

/// Coefficients and kernels of a model, ready for a scheme.
#[derive(Debug, Clone)]
pub struct ModelSetup {
    pub coeffs: CoefficientSet,
    pub k1: Arc<dyn Kernel>,
    pub k2: Arc<dyn Kernel>,
}

/// `b(t, z) = λ (f(t) - z)` (affine, `μ = λ f`, `ν = -λ`), the quadratic
/// diffusion, and `K_1 = K_2 = (t-s)^{H-1/2}`.
pub fn qrh_coefficients(model: &QuadraticRoughHeston) -> Result<ModelSetup> {
    model.validate()?;
    let lambda = model.lambda;
    let f = model.f.clone();
    let m = model.clone();
    let coeffs = CoefficientSet::affine_scalar(move |t| lambda * f.eval(t), move |_| -lambda, move |_, z| m.diffusion(z))
        .with_monotone_convex_flag()?
        .with_metadata(serde_json::json!({ "model": "quadratic-rough-heston", "parameters": model.describe() }));
    let k: Arc<dyn Kernel> = Arc::new(PowerKernel::new(model.kernel_exponent()));
    Ok(ModelSetup {
        coeffs,
        k1: k.clone(),
        k2: k,
    })
}

/// `√((1/T) ∫_0^T V_t dt)` with the trapezoid rule on the grid, for one path of `Z`.
pub fn vix_functional(model: &QuadraticRoughHeston, grid: &TimeGrid, z: &[f64]) -> f64 {
    let v: Vec<f64> = z.iter().map(|x| model.variance(*x)).collect();
    let n = grid.n;
    let mut s = 0.5 * (v[0] + v[n]);
    for x in &v[1..n] {
        s += x;
    }
    (s / n as f64).max(0.0).sqrt()
}

/// Monte Carlo VIX premium with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VixEstimate {
    pub estimate: f64,
    pub se: f64,
    pub num_paths: usize,
}

fn vix_values(batch: &PathBatch, model: &QuadraticRoughHeston) -> Result<Vec<f64>> {
    if batch.num_paths == 0 {
        return Err(Error::EmptyBatch);
    }
    if batch.dim_d != 1 {
        return Err(Error::Dimension(format!("VIX needs a scalar process, got d = {}", batch.dim_d)));
    }
    Ok((0..batch.num_paths).map(|p| vix_functional(model, &batch.grid, batch.path(p))).collect())
}

/// `E √((1/T) ∫ (a (Z_t - b)^2 + c) dt)` over a batch of `Z` paths.
pub fn vix_premium(batch: &PathBatch, model: &QuadraticRoughHeston) -> Result<VixEstimate> {
    let vals = vix_values(batch, model)?;
    if vals.len() == 1 {
        return Ok(VixEstimate {
            estimate: vals[0],
            se: 0.0,
            num_paths: 1,
        });
    }
    let s = paired_stats(&vals)?;
    Ok(VixEstimate {
        estimate: s.mean,
        se: s.se,
        num_paths: s.n,
    })
}

/// Paired difference `premium(hi) - premium(lo)` over two CRN-coupled batches.
pub fn vix_paired_difference(
    lo: &PathBatch,
    model_lo: &QuadraticRoughHeston,
    hi: &PathBatch,
    model_hi: &QuadraticRoughHeston,
) -> Result<PairedStats> {
    lo.check_compatible(hi)?;
    let a = vix_values(lo, model_lo)?;
    let b = vix_values(hi, model_hi)?;
    let d: Vec<f64> = b.iter().zip(&a).map(|(y, x)| y - x).collect();
    paired_stats(&d)
}

/// Declared shape of a test functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexTag {
    Convex,
    ConvexNondecreasing,
    ConvexNonincreasing,
}

/// Order whose test functionals are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    /// All convex functionals.
    Cvx,
    /// Nondecreasing convex functionals.
    Icv,
    /// Nonincreasing convex functionals.
    Dcv,
}

impl ConvexTag {
    pub fn admits(self, order: OrderKind) -> bool {
        match order {
            OrderKind::Cvx => true,
            OrderKind::Icv => self == ConvexTag::ConvexNondecreasing,
            OrderKind::Dcv => self == ConvexTag::ConvexNonincreasing,
        }
    }
}

type PathFn = dyn Fn(&[f64], &TimeGrid) -> f64 + Send + Sync;

/// A functional of a scalar grid path, evaluated on its affine interpolation.
#[derive(Clone)]
pub struct PathFunctional {
    pub id: String,
    pub tag: ConvexTag,
    eval: Arc<PathFn>,
}

impl fmt::Debug for PathFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathFunctional({}, {:?})", self.id, self.tag)
    }
}

impl PathFunctional {
    pub fn new(id: impl Into<String>, tag: ConvexTag, eval: impl Fn(&[f64], &TimeGrid) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            id: id.into(),
            tag,
            eval: Arc::new(eval),
        }
    }

    /// `F(i_n(x))` for grid values `x_0..x_n`.
    pub fn eval(&self, x: &[f64], grid: &TimeGrid) -> f64 {
        (self.eval)(x, grid)
    }

    /// `‖i_n(x)‖_sup = max_k |x_k|`.
    pub fn sup_norm() -> Self {
        Self::new("sup-norm", ConvexTag::Convex, |x, _| x.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// `(x(T) - K)^+`.
    pub fn call(strike: f64) -> Self {
        Self::new(format!("call[K={strike}]"), ConvexTag::ConvexNondecreasing, move |x, _| {
            (x[x.len() - 1] - strike).max(0.0)
        })
    }

    /// `(K - x(T))^+`.
    pub fn put(strike: f64) -> Self {
        Self::new(format!("put[K={strike}]"), ConvexTag::ConvexNonincreasing, move |x, _| {
            (strike - x[x.len() - 1]).max(0.0)
        })
    }

    /// `x(T)`.
    pub fn terminal() -> Self {
        Self::new("terminal", ConvexTag::ConvexNondecreasing, |x, _| x[x.len() - 1])
    }

    /// `-x(T)`.
    pub fn neg_terminal() -> Self {
        Self::new("neg-terminal", ConvexTag::ConvexNonincreasing, |x, _| -x[x.len() - 1])
    }

    /// `sup_t i_n(x)(t) = max_k x_k`.
    pub fn running_max() -> Self {
        Self::new("running-max", ConvexTag::ConvexNondecreasing, |x, _| {
            x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        })
    }

    /// `-inf_t i_n(x)(t)`.
    pub fn neg_running_min() -> Self {
        Self::new("neg-running-min", ConvexTag::ConvexNonincreasing, |x, _| {
            -x.iter().copied().fold(f64::INFINITY, f64::min)
        })
    }

    /// `∫_0^T i_n(x)(t)^2 dt`, exact on each affine piece.
    pub fn integral_square() -> Self {
        Self::new("integral-square", ConvexTag::Convex, |x, g| {
            let h = g.step();
            x.windows(2).map(|w| h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0).sum()
        })
    }

    /// `∫_0^T |i_n(x)(t)| dt`, exact on each affine piece.
    pub fn integral_abs() -> Self {
        Self::new("integral-abs", ConvexTag::Convex, |x, g| {
            let h = g.step();
            x.windows(2).map(|w| h * abs_piece(w[0], w[1])).sum()
        })
    }

    /// `∫_0^T i_n(x)(t)^+ dt`, exact on each affine piece.
    pub fn integral_positive_part() -> Self {
        Self::new("integral-positive-part", ConvexTag::ConvexNondecreasing, |x, g| {
            let h = g.step();
            x.windows(2).map(|w| h * positive_piece(w[0], w[1])).sum()
        })
    }

    /// The VIX functional of a quadratic rough Heston model.
    pub fn vix(model: QuadraticRoughHeston) -> Self {
        Self::new("vix", ConvexTag::Convex, move |x, g| vix_functional(&model, g, x))
    }
}

/// `∫_0^1 |a + u (b - a)| du`.
fn abs_piece(a: f64, b: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * (a.abs() + b.abs())
    } else {
        0.5 * (a * a + b * b) / (a.abs() + b.abs())
    }
}

/// `∫_0^1 (a + u (b - a))^+ du`.
fn positive_piece(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        0.5 * (a + b)
    } else if a <= 0.0 && b <= 0.0 {
        0.0
    } else {
        let (p, m) = if a > 0.0 { (a, -b) } else { (b, -a) };
        0.5 * p * p / (p + m)
    }
}

/// A list of convex path functionals.
#[derive(Debug, Clone, Default)]
pub struct ConvexFunctionalFamily {
    pub members: Vec<PathFunctional>,
}

impl ConvexFunctionalFamily {
    pub fn new(members: Vec<PathFunctional>) -> Self {
        Self { members }
    }

    /// Sup-norm, calls and puts at `strikes`, terminal value and its negative,
    /// running extremes, and the three exact time integrals.
    pub fn standard(strikes: &[f64]) -> Self {
        let mut members = vec![PathFunctional::sup_norm()];
        members.extend(strikes.iter().map(|k| PathFunctional::call(*k)));
        members.extend(strikes.iter().map(|k| PathFunctional::put(*k)));
        members.extend([
            PathFunctional::terminal(),
            PathFunctional::neg_terminal(),
            PathFunctional::running_max(),
            PathFunctional::neg_running_min(),
            PathFunctional::integral_square(),
            PathFunctional::integral_abs(),
            PathFunctional::integral_positive_part(),
        ]);
        Self { members }
    }

    pub fn push(&mut self, f: PathFunctional) {
        self.members.push(f);
    }

    /// Members admissible for `order`.
    pub fn filter(&self, order: OrderKind) -> Vec<&PathFunctional> {
        self.members.iter().filter(|f| f.tag.admits(order)).collect()
    }

    /// Checks `F((x+y)/2) <= (F(x)+F(y))/2` on `samples` random path pairs,
    /// to `1e-10` relative. Returns the first failing functional and sample.
    pub fn check_convexity(&self, grid: &TimeGrid, samples: usize, seed: u64) -> Result<()> {
        let mut rng = substream_for(seed, 0, StreamPurpose::Checker);
        let n = grid.n;
        for s in 0..samples {
            let x: Vec<f64> = random_path(&mut rng, n);
            let y: Vec<f64> = random_path(&mut rng, n);
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
            for f in &self.members {
                let (fx, fy, fm) = (f.eval(&x, grid), f.eval(&y, grid), f.eval(&mid, grid));
                let rhs = 0.5 * fx + 0.5 * fy;
                if fm > rhs + 1e-10 * (1.0 + rhs.abs()) {
                    return Err(Error::Domain(format!(
                        "functional {} fails midpoint convexity at sample {s} (seed {seed}): {fm} > {rhs}",
                        f.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks the declared monotonicity on ordered pairs `x <= y`.
    pub fn check_monotonicity(&self, grid: &TimeGrid, samples: usize, seed: u64) -> Result<()> {
        let mut rng = substream_for(seed, 1, StreamPurpose::Checker);
        let n = grid.n;
        for s in 0..samples {
            let x = random_path(&mut rng, n);
            let y: Vec<f64> = x.iter().map(|v| v + rng.next_normal().abs()).collect();
            for f in &self.members {
                let (fx, fy) = (f.eval(&x, grid), f.eval(&y, grid));
                let tol = 1e-12 * (1.0 + fx.abs() + fy.abs());
                let bad = match f.tag {
                    ConvexTag::Convex => false,
                    ConvexTag::ConvexNondecreasing => fx > fy + tol,
                    ConvexTag::ConvexNonincreasing => fx < fy - tol,
                };
                if bad {
                    return Err(Error::Domain(format!(
                        "functional {} breaks its declared monotonicity at sample {s} (seed {seed})",
                        f.id
                    )));
                }
            }
        }
        Ok(())
    }
}

fn random_path(rng: &mut crate::engine::NormalStream, n: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(n + 1);
    let mut v = rng.next_normal();
    x.push(v);
    for _ in 0..n {
        v += rng.next_normal();
        x.push(v);
    }
    x
}
