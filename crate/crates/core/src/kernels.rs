//! Two-time Volterra kernels, their cell integrals on a uniform grid, and the
//! covariance matrices of the kernel-integrated Brownian noise.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss_kronrod, graded_left, GaussLegendre};
use crate::schemes::{SchemeKind, TimeGrid};

/// Relative tolerance of the generic adaptive quadrature fallback.
pub const GENERIC_QUAD_REL_TOL: f64 = 1e-9;
const GENERIC_QUAD_MAX_INTERVALS: usize = 4000;

/// Which integral a kernel multiplies in the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRole {
    /// `K_1`, integrated against `ds`.
    Drift,
    /// `K_2`, integrated against `dW_s`.
    Diffusion,
}

impl KernelRole {
    fn exponent_name(self) -> &'static str {
        match self {
            KernelRole::Drift => "alpha1",
            KernelRole::Diffusion => "alpha2",
        }
    }
}

/// A nonnegative kernel `K(t, s)` defined for `0 <= s < t`.
///
/// Implementors only need [`Kernel::eval`]; the integral hooks fall back to
/// adaptive Gauss–Kronrod quadrature when no closed form is supplied.
pub trait Kernel: fmt::Debug + Send + Sync {
    /// Pointwise value. Callers guarantee `s < t`.
    fn eval(&self, t: f64, s: f64) -> f64;

    /// `true` when `K(t, s)` only depends on `t - s`.
    fn is_stationary(&self) -> bool {
        false
    }

    /// Checks that the kernel is admissible in the given role.
    fn validate(&self, _role: KernelRole) -> Result<()> {
        Ok(())
    }

    /// `∫_lo^hi K(t, s) ds` for `lo <= hi <= t`.
    fn integral(&self, t: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t, t, lo, hi)?;
        adaptive_gauss_kronrod(
            |s| self.eval(t, s),
            lo,
            hi,
            GENERIC_QUAD_REL_TOL,
            1e-300,
            GENERIC_QUAD_MAX_INTERVALS,
        )
    }

    /// `∫_lo^hi K(t1, s) K(t2, s) ds` for `lo <= hi <= min(t1, t2)`.
    fn cross_moment(&self, t1: f64, t2: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t1, t2, lo, hi)?;
        adaptive_gauss_kronrod(
            |s| self.eval(t1, s) * self.eval(t2, s),
            lo,
            hi,
            GENERIC_QUAD_REL_TOL,
            1e-300,
            GENERIC_QUAD_MAX_INTERVALS,
        )
    }

    /// `∫_{t_{l-1}}^{t_l} K(t_k, s) ds` on a uniform grid of step `h`, `1 <= l <= k`.
    fn grid_cell_integral(&self, h: f64, k: usize, l: usize) -> Result<f64> {
        let t = k as f64 * h;
        self.integral(t, (l - 1) as f64 * h, l as f64 * h)
    }

    /// `∫_0^h K((1+i)h, u) K((1+j)h, u) du`, the entry `(i, j)` of the first
    /// step covariance matrix of a stationary kernel on a grid of step `h`.
    fn grid_cov_entry(&self, h: f64, i: usize, j: usize) -> Result<f64> {
        self.cross_moment((1 + i) as f64 * h, (1 + j) as f64 * h, 0.0, h)
    }

    /// Metadata written next to simulation outputs.
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "custom" })
    }
}

fn check_interval(t1: f64, t2: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo <= hi) || hi > t1.min(t2) || lo < 0.0 {
        return Err(Error::Domain(format!(
            "integration interval [{lo}, {hi}] must lie below min(t1, t2) = {}",
            t1.min(t2)
        )));
    }
    Ok(())
}

/// Evaluates `kernel` at `(t, s)` after checking `0 <= s < t`.
pub fn eval_kernel(kernel: &dyn Kernel, t: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s < t) {
        return Err(Error::Domain(format!(
            "kernel evaluated outside 0 <= s < t (t = {t}, s = {s})"
        )));
    }
    Ok(kernel.eval(t, s))
}

/// `x^e - y^e` for `x >= y >= 0`, without cancellation when `x / y` is close to one.
pub(crate) fn pow_diff(x: f64, y: f64, e: f64) -> f64 {
    if y <= 0.0 {
        return x.powf(e);
    }
    y.powf(e) * (e * ((x - y) / y).ln_1p()).exp_m1()
}

/// Power kernel `scale * (t - s)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerKernel {
    pub alpha: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl PowerKernel {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, scale: 1.0 }
    }

    pub fn scaled(alpha: f64, scale: f64) -> Self {
        Self { alpha, scale }
    }

    /// Regularity exponents of the pair `(K_1, K_2) = (self, diffusion)` with a
    /// caller-chosen integrability exponent `beta`.
    pub fn regularity(&self, diffusion: &PowerKernel, beta: f64) -> Result<KernelRegularity> {
        KernelRegularity::for_power_pair(self.alpha, diffusion.alpha, beta)
    }

    /// `∫_0^len (p + x)^alpha (q + x)^alpha dx` for `p, q >= 0` (unscaled).
    fn offset_moment(&self, p: f64, q: f64, len: f64) -> f64 {
        let a = self.alpha;
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        if len <= 0.0 {
            return 0.0;
        }
        if q == 0.0 {
            return len.powf(2.0 * a + 1.0) / (2.0 * a + 1.0);
        }
        if p == 0.0 {
            // x = len * v^{1/(a+1)} absorbs the x^a singularity.
            let inv = 1.0 / (a + 1.0);
            let integrand = |v: f64| (q + len * v.powf(inv)).powf(a);
            return len.powf(a + 1.0) * inv * graded_left(1.0, integrand);
        }
        graded_left(len, |x| ((p + x) * (q + x)).powf(a))
    }
}

impl Kernel for PowerKernel {
    fn eval(&self, t: f64, s: f64) -> f64 {
        self.scale * (t - s).powf(self.alpha)
    }

    fn is_stationary(&self) -> bool {
        true
    }

    fn validate(&self, role: KernelRole) -> Result<()> {
        let bound = match role {
            KernelRole::Drift => -1.0,
            KernelRole::Diffusion => -0.5,
        };
        if !self.alpha.is_finite() || self.alpha <= bound {
            let b = if bound == -1.0 { "-1" } else { "-1/2" };
            return Err(Error::Domain(format!(
                "{} must exceed {b} (got {})",
                role.exponent_name(),
                self.alpha
            )));
        }
        if !self.scale.is_finite() || self.scale < 0.0 {
            return Err(Error::Domain(format!(
                "kernel scale must be finite and nonnegative (got {})",
                self.scale
            )));
        }
        Ok(())
    }

    fn integral(&self, t: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t, t, lo, hi)?;
        let e = self.alpha + 1.0;
        Ok(self.scale * pow_diff(t - lo, t - hi, e) / e)
    }

    fn cross_moment(&self, t1: f64, t2: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t1, t2, lo, hi)?;
        Ok(self.scale * self.scale * self.offset_moment(t1 - hi, t2 - hi, hi - lo))
    }

    fn grid_cell_integral(&self, h: f64, k: usize, l: usize) -> Result<f64> {
        Ok(self.scale * drift_weight_power(self.alpha, h, k - l)?)
    }

    fn grid_cov_entry(&self, h: f64, i: usize, j: usize) -> Result<f64> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        Ok(self.scale * self.scale * cov_entry_power(self.alpha, h, i, j)?)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "power", "alpha": self.alpha, "scale": self.scale })
    }
}

/// Constant kernel `K(t, s) = value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantKernel {
    pub value: f64,
}

impl ConstantKernel {
    pub fn new(value: f64) -> Self {
        Self { value }
    }
}

impl Kernel for ConstantKernel {
    fn eval(&self, _t: f64, _s: f64) -> f64 {
        self.value
    }

    fn is_stationary(&self) -> bool {
        true
    }

    fn validate(&self, _role: KernelRole) -> Result<()> {
        if !self.value.is_finite() || self.value < 0.0 {
            return Err(Error::Domain(format!(
                "constant kernel value must be finite and nonnegative (got {})",
                self.value
            )));
        }
        Ok(())
    }

    fn integral(&self, t: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t, t, lo, hi)?;
        Ok(self.value * (hi - lo))
    }

    fn cross_moment(&self, t1: f64, t2: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t1, t2, lo, hi)?;
        Ok(self.value * self.value * (hi - lo))
    }

    fn grid_cell_integral(&self, h: f64, _k: usize, _l: usize) -> Result<f64> {
        Ok(self.value * h)
    }

    fn grid_cov_entry(&self, h: f64, _i: usize, _j: usize) -> Result<f64> {
        Ok(self.value * self.value * h)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "constant", "value": self.value })
    }
}

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type IntegralFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;
type CrossFn = dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync;

/// User-defined kernel given by an evaluation callback and optional closed-form
/// integral callbacks.
#[derive(Clone)]
pub struct FnKernel {
    eval: Arc<KernelFn>,
    integral: Option<Arc<IntegralFn>>,
    cross: Option<Arc<CrossFn>>,
    stationary: bool,
    label: String,
}

impl fmt::Debug for FnKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnKernel")
            .field("label", &self.label)
            .field("stationary", &self.stationary)
            .field("closed_integral", &self.integral.is_some())
            .field("closed_cross_moment", &self.cross.is_some())
            .finish()
    }
}

impl FnKernel {
    pub fn new(label: impl Into<String>, eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            integral: None,
            cross: None,
            stationary: false,
            label: label.into(),
        }
    }

    /// Declares that the kernel only depends on `t - s`.
    pub fn stationary(mut self, yes: bool) -> Self {
        self.stationary = yes;
        self
    }

    /// Closed form of `(t, lo, hi) -> ∫_lo^hi K(t, s) ds`.
    pub fn with_integral(mut self, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.integral = Some(Arc::new(f));
        self
    }

    /// Closed form of `(t1, t2, lo, hi) -> ∫_lo^hi K(t1, s) K(t2, s) ds`.
    pub fn with_cross_moment(
        mut self,
        f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.cross = Some(Arc::new(f));
        self
    }
}

impl Kernel for FnKernel {
    fn eval(&self, t: f64, s: f64) -> f64 {
        (self.eval)(t, s)
    }

    fn is_stationary(&self) -> bool {
        self.stationary
    }

    fn integral(&self, t: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t, t, lo, hi)?;
        match &self.integral {
            Some(f) => Ok(f(t, lo, hi)),
            None => adaptive_gauss_kronrod(
                |s| (self.eval)(t, s),
                lo,
                hi,
                GENERIC_QUAD_REL_TOL,
                1e-300,
                GENERIC_QUAD_MAX_INTERVALS,
            ),
        }
    }

    fn cross_moment(&self, t1: f64, t2: f64, lo: f64, hi: f64) -> Result<f64> {
        check_interval(t1, t2, lo, hi)?;
        match &self.cross {
            Some(f) => Ok(f(t1, t2, lo, hi)),
            None => adaptive_gauss_kronrod(
                |s| (self.eval)(t1, s) * (self.eval)(t2, s),
                lo,
                hi,
                GENERIC_QUAD_REL_TOL,
                1e-300,
                GENERIC_QUAD_MAX_INTERVALS,
            ),
        }
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "custom", "label": self.label, "stationary": self.stationary })
    }
}

/// Serializable kernel description used by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Power {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Constant {
        value: f64,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Arc<dyn Kernel> {
        match *self {
            KernelSpec::Power { alpha, scale } => Arc::new(PowerKernel { alpha, scale }),
            KernelSpec::Constant { value } => Arc::new(ConstantKernel { value }),
        }
    }

    /// Builds the kernel and validates it for `role`.
    pub fn build_for(&self, role: KernelRole) -> Result<Arc<dyn Kernel>> {
        let k = self.build();
        k.validate(role)?;
        Ok(k)
    }
}

/// Declared regularity exponents of a kernel pair.
///
/// These are metadata: they only enter theoretical rates and are never used by
/// the simulation itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRegularity {
    pub beta: f64,
    pub theta: f64,
    pub theta_hat: f64,
    pub theta_underline: Option<f64>,
    pub theta_hat_underline: Option<f64>,
    pub theta_check: Option<f64>,
}

impl KernelRegularity {
    /// Exponents of the power pair `((t-s)^a1, (t-s)^a2)`: every continuity
    /// exponent equals `min(a1 + 1, a2 + 1/2, 1)` and `beta` must lie in
    /// `(1, 1/(2 a1 + 1)^- ∧ 1/(2 a2)^-)`.
    pub fn for_power_pair(alpha1: f64, alpha2: f64, beta: f64) -> Result<Self> {
        if alpha1 <= -1.0 {
            return Err(Error::Domain(format!("alpha1 must exceed -1 (got {alpha1})")));
        }
        if alpha2 <= -0.5 {
            return Err(Error::Domain(format!("alpha2 must exceed -1/2 (got {alpha2})")));
        }
        let (lo, hi) = Self::beta_range(alpha1, alpha2);
        if !(beta > lo && beta < hi) {
            return Err(Error::Domain(format!(
                "beta = {beta} outside the admissible interval ({lo}, {hi})"
            )));
        }
        let theta = (alpha1 + 1.0).min(alpha2 + 0.5).min(1.0);
        Ok(Self {
            beta,
            theta,
            theta_hat: theta,
            theta_underline: Some(theta),
            theta_hat_underline: Some(theta),
            theta_check: Some(theta),
        })
    }

    /// Open interval of admissible `beta` for a power pair.
    pub fn beta_range(alpha1: f64, alpha2: f64) -> (f64, f64) {
        let neg = |x: f64| (-x).max(0.0);
        let inv = |x: f64| if x > 0.0 { 1.0 / x } else { f64::INFINITY };
        (1.0, inv(neg(2.0 * alpha1 + 1.0)).min(inv(neg(2.0 * alpha2))))
    }

    /// Convergence exponent `gamma ∧ theta ∧ theta_hat` of the schemes for a
    /// time-Hölder exponent `gamma` of the coefficients.
    pub fn strong_rate(&self, gamma: f64) -> f64 {
        gamma.min(self.theta).min(self.theta_hat)
    }
}

/// `∫_{t_{l-1}}^{t_l} K_1(t_{l+i}, s) ds` for `K_1 = (t-s)^alpha1` on a grid of step `h`.
pub fn drift_weight_power(alpha1: f64, h: f64, i: usize) -> Result<f64> {
    if !(alpha1 > -1.0) {
        return Err(Error::Domain(format!("alpha1 must exceed -1 (got {alpha1})")));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive (got {h})")));
    }
    let e = alpha1 + 1.0;
    let i = i as f64;
    Ok(h.powf(e) / e * pow_diff(i + 1.0, i, e))
}

/// Entry `Σ^(l)_{l+i, l+j}` of the step covariance for `K_2 = (t-s)^alpha2`:
/// `h^{2 alpha2 + 1} ∫_0^1 ((i+u)(j+u))^alpha2 du`, `i <= j`.
pub fn cov_entry_power(alpha2: f64, h: f64, i: usize, j: usize) -> Result<f64> {
    if !(alpha2 > -0.5) {
        return Err(Error::Domain(format!("alpha2 must exceed -1/2 (got {alpha2})")));
    }
    if i > j {
        return Err(Error::Domain(format!("covariance entry needs i <= j (got i = {i}, j = {j})")));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive (got {h})")));
    }
    let a = alpha2;
    let scale = h.powf(2.0 * a + 1.0);
    let (fi, fj) = (i as f64, j as f64);
    if i == j {
        let e = 2.0 * a + 1.0;
        return Ok(scale / e * pow_diff(fi + 1.0, fi, e));
    }
    if i == 0 {
        // v = u^{alpha2 + 1}
        let inv = 1.0 / (a + 1.0);
        let integrand = |v: f64| (fj + v.powf(inv)).powf(a);
        let integral = if a <= 0.0 {
            GaussLegendre::order64().integrate(0.0, 1.0, integrand)
        } else {
            // v^{1/(a+1)} has an unbounded derivative at 0 when a > 0.
            graded_left(1.0, integrand)
        };
        return Ok(scale * inv * integral);
    }
    let integral =
        GaussLegendre::order64().integrate(0.0, 1.0, |u| ((fi + u) * (fj + u)).powf(a));
    Ok(scale * integral)
}

/// Lower-triangular table `w[k][l]`, `1 <= l <= k <= n`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightTable {
    /// Entry depends on `k - l` only; index `k - l`.
    Lagged(Vec<f64>),
    /// Packed rows: row `k` holds `l = 1..=k`.
    Dense(Vec<f64>),
}

impl WeightTable {
    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        debug_assert!(1 <= l && l <= k);
        match self {
            WeightTable::Lagged(v) => v[k - l],
            WeightTable::Dense(v) => v[(k - 1) * k / 2 + (l - 1)],
        }
    }

    fn build(n: usize, stationary: bool, mut f: impl FnMut(usize, usize) -> Result<f64>) -> Result<Self> {
        if stationary {
            let v = (0..n).map(|i| f(1 + i, 1)).collect::<Result<Vec<_>>>()?;
            Ok(WeightTable::Lagged(v))
        } else {
            let mut v = Vec::with_capacity(n * (n + 1) / 2);
            for k in 1..=n {
                for l in 1..=k {
                    v.push(f(k, l)?);
                }
            }
            Ok(WeightTable::Dense(v))
        }
    }

    fn check_finite_nonneg(&self) -> Result<()> {
        let v = match self {
            WeightTable::Lagged(v) | WeightTable::Dense(v) => v,
        };
        if let Some(bad) = v.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Domain(format!("kernel weight {bad} is not finite and nonnegative")));
        }
        Ok(())
    }
}

/// Drift weights `w[k][l] = ∫_{t_{l-1}}^{t_l} K_1(t_k, ŝ) ds` of one grid.
#[derive(Debug, Clone)]
pub struct GridCellIntegrals {
    pub grid: TimeGrid,
    pub mode: SchemeKind,
    pub weights: WeightTable,
}

impl GridCellIntegrals {
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.weights.get(k, l)
    }
}

/// Fills the drift-weight table of `kernel1` for the given scheme.
///
/// K-discrete: `ŝ = t_{l-1}`, so `w[k][l] = K_1(t_k, t_{l-1}) h`.
/// K-integrated: `ŝ = s`, so `w[k][l]` is the exact cell integral.
pub fn build_drift_weights(kernel1: &dyn Kernel, grid: &TimeGrid, mode: SchemeKind) -> Result<GridCellIntegrals> {
    kernel1.validate(KernelRole::Drift)?;
    let h = grid.step();
    let weights = match mode {
        SchemeKind::KDiscrete => WeightTable::build(grid.n, kernel1.is_stationary(), |k, l| {
            Ok(kernel1.eval(grid.time(k), grid.time(l - 1)) * h)
        })?,
        SchemeKind::KIntegrated => WeightTable::build(grid.n, kernel1.is_stationary(), |k, l| {
            kernel1.grid_cell_integral(h, k, l)
        })?,
    };
    weights.check_finite_nonneg()?;
    Ok(GridCellIntegrals {
        grid: *grid,
        mode,
        weights,
    })
}

/// Pointwise diffusion weights `K_2(t_k, t_{l-1})` of the K-discrete scheme.
pub fn build_discrete_noise_weights(kernel2: &dyn Kernel, grid: &TimeGrid) -> Result<WeightTable> {
    kernel2.validate(KernelRole::Diffusion)?;
    let w = WeightTable::build(grid.n, kernel2.is_stationary(), |k, l| {
        Ok(kernel2.eval(grid.time(k), grid.time(l - 1)))
    })?;
    w.check_finite_nonneg()?;
    Ok(w)
}

/// The covariance matrices `Σ^(l)`, `l = 1..=n`, of the kernel-integrated noise
/// blocks `Y^(l) = (∫_{t_{l-1}}^{t_l} K_2(t_k, s) dW_s)_{k = l..n}`.
#[derive(Debug, Clone)]
pub enum CovarianceMatrices {
    /// Stationary kernel: `Σ^(l)` is the leading `(n-l+1)` block of `Σ^(1)`.
    Shared(DMatrix<f64>),
    /// One matrix per step, `Σ^(l)` stored at index `l - 1`.
    PerStep(Vec<DMatrix<f64>>),
}

impl CovarianceMatrices {
    pub fn n(&self) -> usize {
        match self {
            CovarianceMatrices::Shared(m) => m.nrows(),
            CovarianceMatrices::PerStep(v) => v.len(),
        }
    }

    /// `Σ^(l)` for `1 <= l <= n`.
    pub fn sigma(&self, l: usize) -> DMatrix<f64> {
        let n = self.n();
        assert!(1 <= l && l <= n, "step index {l} outside 1..={n}");
        match self {
            CovarianceMatrices::Shared(m) => {
                let d = n - l + 1;
                m.view((0, 0), (d, d)).into_owned()
            }
            CovarianceMatrices::PerStep(v) => v[l - 1].clone(),
        }
    }
}

/// Builds `Σ^(l)_{ij} = ∫_0^h K_2(t_i, t_{l-1}+u) K_2(t_j, t_{l-1}+u) du`.
pub fn build_cov_matrices(kernel2: &dyn Kernel, grid: &TimeGrid) -> Result<CovarianceMatrices> {
    kernel2.validate(KernelRole::Diffusion)?;
    let n = grid.n;
    let h = grid.step();
    if kernel2.is_stationary() {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = kernel2.grid_cov_entry(h, i, j)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        return Ok(CovarianceMatrices::Shared(m));
    }
    let mut out = Vec::with_capacity(n);
    for l in 1..=n {
        let d = n - l + 1;
        let lo = grid.time(l - 1);
        let hi = grid.time(l);
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in a..d {
                let v = kernel2.cross_moment(grid.time(l + a), grid.time(l + b), lo, hi)?;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        out.push(m);
    }
    Ok(CovarianceMatrices::PerStep(out))
}
