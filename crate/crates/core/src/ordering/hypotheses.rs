//! Sample-based checkers for the comparison hypotheses.
//!
//! Every checker draws its sample `i` from the stream `(seed, i)`, so a
//! failing sample is reproducible from the witness alone. A verdict of
//! "holds-on-sample" is never a proof.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::engine::{substream_for, NormalStream, StreamPurpose};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::matrixlab::{kron, loewner_gap, sym_sqrt};
use crate::models::OrderKind;
use crate::schemes::{CoefficientSet, InitialCondition};

/// Hypothesis identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "C-sigma")]
    CSigma,
    #[serde(rename = "CK2")]
    CK2,
    #[serde(rename = "CK2-sigma")]
    CK2Sigma,
    #[serde(rename = "CK2-sigma-disc")]
    CK2SigmaDisc,
    #[serde(rename = "CK2-sigma-int")]
    CK2SigmaInt,
    #[serde(rename = "CK2-sigma-1d")]
    CK2Sigma1d,
    #[serde(rename = "Conv")]
    Conv,
    #[serde(rename = "Conv-1d")]
    Conv1d,
    #[serde(rename = "drift-compare-icv")]
    DriftCompareIcv,
    #[serde(rename = "drift-compare-dcv")]
    DriftCompareDcv,
    #[serde(rename = "initial-order")]
    InitialOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnSample,
    Fails,
    /// Only a sufficient criterion was available and it did not hold.
    Inconclusive,
}

/// The sampled tuple at which a condition failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub seed: u64,
    pub index: usize,
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    /// Amount by which the condition is violated (positive).
    pub violation: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderHypothesisReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    pub samples_checked: usize,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl OrderHypothesisReport {
    fn holds(condition: ConditionId, samples: usize) -> Self {
        Self {
            condition,
            verdict: Verdict::HoldsOnSample,
            samples_checked: samples,
            witness: None,
            note: None,
        }
    }

    fn fails(condition: ConditionId, samples: usize, witness: Witness) -> Self {
        Self {
            condition,
            verdict: Verdict::Fails,
            samples_checked: samples,
            witness: Some(witness),
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn holds_on_sample(&self) -> bool {
        self.verdict == Verdict::HoldsOnSample
    }
}

/// Sampling scope of the checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// Time horizon `T` of the tuples.
    pub horizon: f64,
    pub samples: usize,
    /// Largest tuple length `j`, at most 6.
    pub j_max: usize,
    /// States are drawn uniformly from `[-radius, radius]^d`.
    pub radius: f64,
    /// Relative tolerance of the matrix and scalar comparisons.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            samples: 2000,
            j_max: 6,
            radius: 3.0,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// Largest supported tuple length.
pub const MAX_TUPLE_LEN: usize = 6;

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || self.samples == 0 || self.j_max == 0 || self.j_max > MAX_TUPLE_LEN {
            return Err(Error::Config(format!(
                "sampler needs T > 0, samples > 0 and 1 <= j_max <= {MAX_TUPLE_LEN} (got {self:?})"
            )));
        }
        if !(self.radius >= 0.0 && self.tol >= 0.0) {
            return Err(Error::Config("sampler radius and tolerance must be nonnegative".into()));
        }
        Ok(())
    }

    fn stream(&self, i: usize) -> NormalStream {
        substream_for(self.seed, i as u64, StreamPurpose::Checker)
    }

    /// Stratified time in `[0, T)` for sample `i`.
    fn stratified(&self, i: usize, rng: &mut NormalStream) -> f64 {
        self.horizon * (i as f64 + rng.next_uniform()) / self.samples as f64
    }

    fn point(&self, d: usize, rng: &mut NormalStream) -> Vec<f64> {
        (0..d).map(|_| self.radius * (2.0 * rng.next_uniform() - 1.0)).collect()
    }

    /// Sorted times `s_0 < s_1 <= ... <= s_len` of sample `i`, with the first
    /// draw stratified.
    fn tuple(&self, i: usize, len: usize, rng: &mut NormalStream) -> Vec<f64> {
        let mut s = Vec::with_capacity(len + 1);
        s.push(self.stratified(i, rng));
        for _ in 0..len {
            s.push(self.horizon * rng.next_uniform());
        }
        s.sort_by(f64::total_cmp);
        s
    }

    fn tuple_len(&self, i: usize) -> usize {
        1 + i % self.j_max
    }
}

fn gram(coeffs: &CoefficientSet, t: f64, x: &[f64]) -> DMatrix<f64> {
    let (d, q) = (coeffs.dim_d, coeffs.dim_q);
    let mut s = vec![0.0; d * q];
    coeffs.diffusion_at(t, x, &mut s);
    let m = DMatrix::from_row_slice(d, q, &s);
    &m * m.transpose()
}

fn sigma_matrix(coeffs: &CoefficientSet, t: f64, x: &[f64]) -> DMatrix<f64> {
    let (d, q) = (coeffs.dim_d, coeffs.dim_q);
    let mut s = vec![0.0; d * q];
    coeffs.diffusion_at(t, x, &mut s);
    DMatrix::from_row_slice(d, q, &s)
}

fn same_state_dim(a: &CoefficientSet, b: &CoefficientSet) -> Result<usize> {
    if a.dim_d != b.dim_d {
        return Err(Error::Dimension(format!(
            "state dimensions differ: {} vs {}",
            a.dim_d, b.dim_d
        )));
    }
    Ok(a.dim_d)
}

/// `σσ*(t, x) <= σ̃σ̃*(t, x)` in the Loewner order.
pub fn check_c_sigma(x: &CoefficientSet, y: &CoefficientSet, cfg: &SamplerConfig) -> Result<OrderHypothesisReport> {
    cfg.validate()?;
    let d = same_state_dim(x, y)?;
    for i in 0..cfg.samples {
        let mut rng = cfg.stream(i);
        let t = cfg.stratified(i, &mut rng);
        let p = cfg.point(d, &mut rng);
        let gap = loewner_gap(&gram(x, t, &p), &gram(y, t, &p), cfg.tol)?;
        if gap < 0.0 {
            return Ok(OrderHypothesisReport::fails(
                ConditionId::CSigma,
                i + 1,
                Witness {
                    seed: cfg.seed,
                    index: i,
                    times: vec![t],
                    points: p,
                    violation: -gap,
                    detail: "σ̃σ̃* - σσ* has a negative eigenvalue".into(),
                },
            ));
        }
    }
    Ok(OrderHypothesisReport::holds(ConditionId::CSigma, cfg.samples))
}

/// Ratio test for `K_2(t, s) = λ(s) K̃_2(t, s)` with `λ(s) ∈ [0, 1]`.
pub fn check_ck2(k2: &dyn Kernel, k2_tilde: &dyn Kernel, cfg: &SamplerConfig) -> Result<OrderHypothesisReport> {
    cfg.validate()?;
    let mut lambda_range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..cfg.samples {
        let mut rng = cfg.stream(i);
        let s = cfg.stratified(i, &mut rng);
        let ts: Vec<f64> = (0..cfg.j_max.max(2))
            .map(|_| s + (cfg.horizon - s) * rng.next_uniform())
            .filter(|t| *t > s)
            .collect();
        let mut ratios = Vec::with_capacity(ts.len());
        for t in &ts {
            let (a, b) = (k2.eval(*t, s), k2_tilde.eval(*t, s));
            if b == 0.0 {
                if a != 0.0 {
                    return Ok(OrderHypothesisReport::fails(
                        ConditionId::CK2,
                        i + 1,
                        Witness {
                            seed: cfg.seed,
                            index: i,
                            times: vec![s, *t],
                            points: vec![],
                            violation: a.abs(),
                            detail: "K̃_2 vanishes where K_2 does not".into(),
                        },
                    ));
                }
                continue;
            }
            ratios.push((*t, a / b));
        }
        if ratios.is_empty() {
            continue;
        }
        let lo = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let spread = hi - lo;
        let bad_spread = spread > 1e-9 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
        let bad_range = lo < -1e-12 || hi > 1.0 + 1e-12;
        if bad_spread || bad_range {
            let violation = if bad_spread { spread } else { (hi - 1.0).max(-lo) };
            return Ok(OrderHypothesisReport::fails(
                ConditionId::CK2,
                i + 1,
                Witness {
                    seed: cfg.seed,
                    index: i,
                    times: std::iter::once(s).chain(ratios.iter().map(|r| r.0)).collect(),
                    points: ratios.iter().map(|r| r.1).collect(),
                    violation,
                    detail: if bad_spread {
                        "K_2 / K̃_2 depends on t".into()
                    } else {
                        "K_2 / K̃_2 outside [0, 1]".into()
                    },
                },
            ));
        }
        lambda_range = (lambda_range.0.min(lo), lambda_range.1.max(hi));
    }
    Ok(OrderHypothesisReport::holds(ConditionId::CK2, cfg.samples)
        .with_note(format!("observed λ in [{}, {}]", lambda_range.0, lambda_range.1)))
}

/// Variant of the kernel–diffusion comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ck2SigmaVariant {
    /// Kernels frozen at `s_0`.
    Disc,
    /// Kernel Gram integrated over `[s_0, s_1]`.
    Int,
    /// Kernels at any `s ∈ [s_0, s_1)`.
    General,
}

/// `G ⊗ σσ*(s_0, x) <= G̃ ⊗ σ̃σ̃*(s_0, x)` where `G` is the Gram matrix of
/// `(K_2(s_1, s), ..., K_2(s_j, s))` at `s = s_0` (disc), integrated over
/// `s ∈ [s_0, s_1]` (int), or at a sampled `s ∈ [s_0, s_1)` (general).
pub fn check_ck2_sigma(
    k2: &dyn Kernel,
    x: &CoefficientSet,
    k2_tilde: &dyn Kernel,
    y: &CoefficientSet,
    variant: Ck2SigmaVariant,
    cfg: &SamplerConfig,
) -> Result<OrderHypothesisReport> {
    cfg.validate()?;
    let d = same_state_dim(x, y)?;
    let id = match variant {
        Ck2SigmaVariant::Disc => ConditionId::CK2SigmaDisc,
        Ck2SigmaVariant::Int => ConditionId::CK2SigmaInt,
        Ck2SigmaVariant::General => ConditionId::CK2Sigma,
    };
    for i in 0..cfg.samples {
        let mut rng = cfg.stream(i);
        let j = cfg.tuple_len(i);
        let s = cfg.tuple(i, j, &mut rng);
        if s[1] <= s[0] {
            continue;
        }
        let p = cfg.point(d, &mut rng);
        let (g, gt, s_eval) = match variant {
            Ck2SigmaVariant::Disc | Ck2SigmaVariant::General => {
                let at = if variant == Ck2SigmaVariant::Disc {
                    s[0]
                } else {
                    s[0] + (s[1] - s[0]) * rng.next_uniform()
                };
                let v = DMatrix::from_iterator(j, 1, s[1..].iter().map(|t| k2.eval(*t, at)));
                let vt = DMatrix::from_iterator(j, 1, s[1..].iter().map(|t| k2_tilde.eval(*t, at)));
                (&v * v.transpose(), &vt * vt.transpose(), at)
            }
            Ck2SigmaVariant::Int => {
                let mut g = DMatrix::zeros(j, j);
                let mut gt = DMatrix::zeros(j, j);
                for a in 0..j {
                    for b in a..j {
                        let (ta, tb) = (s[1 + a], s[1 + b]);
                        let v = k2.cross_moment(ta, tb, s[0], s[1])?;
                        let vt = k2_tilde.cross_moment(ta, tb, s[0], s[1])?;
                        g[(a, b)] = v;
                        g[(b, a)] = v;
                        gt[(a, b)] = vt;
                        gt[(b, a)] = vt;
                    }
                }
                (g, gt, s[0])
            }
        };
        let lhs = kron(&g, &gram(x, s[0], &p));
        let rhs = kron(&gt, &gram(y, s[0], &p));
        if !lhs.iter().chain(rhs.iter()).all(|v| v.is_finite()) {
            continue;
        }
        let gap = loewner_gap(&lhs, &rhs, cfg.tol)?;
        if gap < 0.0 {
            let mut times = s.clone();
            if variant == Ck2SigmaVariant::General {
                times.push(s_eval);
            }
            return Ok(OrderHypothesisReport::fails(
                id,
                i + 1,
                Witness {
                    seed: cfg.seed,
                    index: i,
                    times,
                    points: p,
                    violation: -gap,
                    detail: format!("Kronecker comparison fails for j = {j}"),
                },
            ));
        }
    }
    Ok(OrderHypothesisReport::holds(id, cfg.samples))
}

/// Scalar form: for each `(s, x)` some `λ ∈ [0, 1]` gives
/// `K_2(t, s) |σ(s, x)| = λ K̃_2(t, s) |σ̃(s, x)|` for all `t ∈ (s, T]`.
pub fn check_ck2_sigma_1d(
    k2: &dyn Kernel,
    x: &CoefficientSet,
    k2_tilde: &dyn Kernel,
    y: &CoefficientSet,
    cfg: &SamplerConfig,
) -> Result<OrderHypothesisReport> {
    cfg.validate()?;
    if x.dim_d != 1 || x.dim_q != 1 || y.dim_d != 1 || y.dim_q != 1 {
        return Err(Error::Dimension("the scalar condition needs d = q = 1".into()));
    }
    for i in 0..cfg.samples {
        let mut rng = cfg.stream(i);
        let j = cfg.tuple_len(i);
        let s = cfg.tuple(i, j, &mut rng);
        if s[1] <= s[0] {
            continue;
        }
        let p = cfg.point(1, &mut rng);
        let (sx, sy) = (x.sigma(s[0], p[0]).abs(), y.sigma(s[0], p[0]).abs());
        let ys: Vec<f64> = s[1..].iter().map(|t| k2.eval(*t, s[0]) * sx).collect();
        let zs: Vec<f64> = s[1..].iter().map(|t| k2_tilde.eval(*t, s[0]) * sy).collect();
        if let Some(v) = proportionality_violation(&ys, &zs, cfg.tol) {
            return Ok(OrderHypothesisReport::fails(
                ConditionId::CK2Sigma1d,
                i + 1,
                Witness {
                    seed: cfg.seed,
                    index: i,
                    times: s,
                    points: p,
                    violation: v,
                    detail: "no λ ∈ [0, 1] with K_2|σ| = λ K̃_2|σ̃|".into(),
                },
            ));
        }
    }
    Ok(OrderHypothesisReport::holds(ConditionId::CK2Sigma1d, cfg.samples))
}

/// `Some(amount)` unless `y = λ z` for some `λ ∈ [0, 1]`, for nonnegative `y, z`.
fn proportionality_violation(y: &[f64], z: &[f64], tol: f64) -> Option<f64> {
    let scale = y.iter().chain(z).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let zn: f64 = z.iter().map(|v| v * v).sum();
    let lambda = if zn > 0.0 {
        y.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / zn
    } else {
        0.0
    };
    let resid = y.iter().zip(z).fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs()));
    let tol_abs = tol.max(1e-9) * scale;
    if resid > tol_abs {
        return Some(resid);
    }
    if lambda > 1.0 + 1e-9 || lambda < -1e-9 {
        return Some((lambda - 1.0).max(-lambda));
    }
    None
}

/// Convexity of `σ`: the midpoint/segment form of `|σ|` for `d = q = 1`, and
/// for `d = q` the sufficient criterion with `V = I` applied to `σ` and to the
/// symmetric square root of `σσ*`.
pub fn check_conv_sigma(sigma: &CoefficientSet, cfg: &SamplerConfig) -> Result<OrderHypothesisReport> {
    cfg.validate()?;
    let (d, q) = (sigma.dim_d, sigma.dim_q);
    if d == 1 && q == 1 {
        for i in 0..cfg.samples {
            let mut rng = cfg.stream(i);
            let t = cfg.stratified(i, &mut rng);
            let (x, y) = (cfg.point(1, &mut rng)[0], cfg.point(1, &mut rng)[0]);
            let a = if i % 2 == 0 { 0.5 } else { rng.next_uniform() };
            let lhs = sigma.sigma(t, a * x + (1.0 - a) * y).abs();
            let rhs = a * sigma.sigma(t, x).abs() + (1.0 - a) * sigma.sigma(t, y).abs();
            if lhs > rhs + cfg.tol.max(1e-12) * (1.0 + rhs.abs()) {
                return Ok(OrderHypothesisReport::fails(
                    ConditionId::Conv1d,
                    i + 1,
                    Witness {
                        seed: cfg.seed,
                        index: i,
                        times: vec![t],
                        points: vec![x, y, a],
                        violation: lhs - rhs,
                        detail: "|σ| is not convex along the segment".into(),
                    },
                ));
            }
        }
        return Ok(OrderHypothesisReport::holds(ConditionId::Conv1d, cfg.samples));
    }
    if d != q {
        return Ok(OrderHypothesisReport {
            condition: ConditionId::Conv,
            verdict: Verdict::Inconclusive,
            samples_checked: 0,
            witness: None,
            note: Some("no decidable criterion for d != q".into()),
        });
    }
    for i in 0..cfg.samples {
        let mut rng = cfg.stream(i);
        let t = cfg.stratified(i, &mut rng);
        let (x, y) = (cfg.point(d, &mut rng), cfg.point(d, &mut rng));
        let a = if i % 2 == 0 { 0.5 } else { rng.next_uniform() };
        let mid: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + (1.0 - a) * v).collect();
        let lhs = gram(sigma, t, &mid);
        let (sx, sy) = (sigma_matrix(sigma, t, &x), sigma_matrix(sigma, t, &y));
        let m = &sx * a + &sy * (1.0 - a);
        let ok_raw = loewner_gap(&lhs, &(&m * m.transpose()), cfg.tol)? >= 0.0;
        let (rx, _) = sym_sqrt(&(&sx * sx.transpose()));
        let (ry, _) = sym_sqrt(&(&sy * sy.transpose()));
        let r = &rx * a + &ry * (1.0 - a);
        let ok_root = loewner_gap(&lhs, &(&r * r.transpose()), cfg.tol)? >= 0.0;
        if !ok_raw && !ok_root {
            return Ok(OrderHypothesisReport {
                condition: ConditionId::Conv,
                verdict: Verdict::Inconclusive,
                samples_checked: i + 1,
                witness: Some(Witness {
                    seed: cfg.seed,
                    index: i,
                    times: vec![t],
                    points: x.into_iter().chain(y).chain([a]).collect(),
                    violation: 0.0,
                    detail: "sufficient criterion with V = I fails".into(),
                }),
                note: Some("sufficient criterion only; not a violation".into()),
            });
        }
    }
    Ok(OrderHypothesisReport::holds(ConditionId::Conv, cfg.samples).with_note("sufficient criterion with V = I"))
}

/// Direction of a monotone comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftDirection {
    Icv,
    Dcv,
}

/// Pointwise or cell-integrated drift comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftVariant {
    /// `K_1(t, s) b(s, x) <= K̃_1(t, s) b̃(s, x)`, `s < t`.
    Disc,
    /// `b(s_0, x) ∫_{s_0}^{s_1} K_1(s_2, s) ds <= b̃(s_0, x) ∫_{s_0}^{s_1} K̃_1(s_2, s) ds`.
    Int,
}

/// Drift comparison for `d = 1`; `Dcv` reverses the inequality.
pub fn check_drift_compare(
    x: &CoefficientSet,
    k1: &dyn Kernel,
    y: &CoefficientSet,
    k1_tilde: &dyn Kernel,
    direction: DriftDirection,
    variant: DriftVariant,
    cfg: &SamplerConfig,
) -> Result<OrderHypothesisReport> {
    cfg.validate()?;
    if x.dim_d != 1 || y.dim_d != 1 {
        return Err(Error::Dimension("drift comparison needs d = 1".into()));
    }
    let id = match direction {
        DriftDirection::Icv => ConditionId::DriftCompareIcv,
        DriftDirection::Dcv => ConditionId::DriftCompareDcv,
    };
    for i in 0..cfg.samples {
        let mut rng = cfg.stream(i);
        let s = cfg.tuple(i, 2, &mut rng);
        if s[1] <= s[0] {
            continue;
        }
        let p = cfg.point(1, &mut rng)[0];
        let (lhs, rhs, times) = match variant {
            DriftVariant::Disc => {
                let (s0, t) = (s[0], s[1]);
                (k1.eval(t, s0) * x.b(s0, p), k1_tilde.eval(t, s0) * y.b(s0, p), vec![s0, t])
            }
            DriftVariant::Int => {
                let (s0, s1, s2) = (s[0], s[1], s[2]);
                let w = k1.integral(s2, s0, s1)?;
                let wt = k1_tilde.integral(s2, s0, s1)?;
                (x.b(s0, p) * w, y.b(s0, p) * wt, s)
            }
        };
        let excess = match direction {
            DriftDirection::Icv => lhs - rhs,
            DriftDirection::Dcv => rhs - lhs,
        };
        if excess > 1e-12 * (lhs.abs() + rhs.abs()) + 1e-300 {
            return Ok(OrderHypothesisReport::fails(
                id,
                i + 1,
                Witness {
                    seed: cfg.seed,
                    index: i,
                    times,
                    points: vec![p],
                    violation: excess,
                    detail: format!("X side {lhs} vs Y side {rhs}"),
                },
            ));
        }
    }
    Ok(OrderHypothesisReport::holds(id, cfg.samples))
}

/// `E (X - K)^+` for a scalar initial law.
fn stop_loss(init: &InitialCondition, k: f64) -> Result<f64> {
    use statrs::function::erf::erfc;
    let phi_cdf = |z: f64| 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let phi_pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    match init {
        InitialCondition::Point { value } if value.len() == 1 => Ok((value[0] - k).max(0.0)),
        InitialCondition::Gaussian { mean, std } if mean.len() == 1 => {
            let (m, s) = (mean[0], std[0]);
            if s == 0.0 {
                return Ok((m - k).max(0.0));
            }
            let z = (m - k) / s;
            Ok(s * phi_pdf(z) + (m - k) * phi_cdf(z))
        }
        InitialCondition::Uniform { lo, hi } if lo.len() == 1 => {
            let (a, b) = (lo[0], hi[0]);
            Ok(if k <= a {
                0.5 * (a + b) - k
            } else if k >= b {
                0.0
            } else {
                (b - k).powi(2) / (2.0 * (b - a))
            })
        }
        _ => Err(Error::Dimension("initial-order check needs scalar laws".into())),
    }
}

fn law_mean(init: &InitialCondition) -> f64 {
    match init {
        InitialCondition::Point { value } => value[0],
        InitialCondition::Gaussian { mean, .. } => mean[0],
        InitialCondition::Uniform { lo, hi } => 0.5 * (lo[0] + hi[0]),
    }
}

fn law_range(init: &InitialCondition) -> (f64, f64) {
    match init {
        InitialCondition::Point { value } => (value[0], value[0]),
        InitialCondition::Gaussian { mean, std } => (mean[0] - 8.0 * std[0], mean[0] + 8.0 * std[0]),
        InitialCondition::Uniform { lo, hi } => (lo[0], hi[0]),
    }
}

/// `X_0 ⪯ Y_0` for the requested order, through stop-loss transforms on a
/// grid of strikes covering both laws (closed forms, no sampling).
pub fn check_initial_order(
    x0: &InitialCondition,
    y0: &InitialCondition,
    order: OrderKind,
    strikes: usize,
    tol: f64,
) -> Result<OrderHypothesisReport> {
    x0.validate(1)?;
    y0.validate(1)?;
    let (mx, my) = (law_mean(x0), law_mean(y0));
    let scale = 1.0 + mx.abs() + my.abs();
    if order == OrderKind::Cvx && (mx - my).abs() > tol * scale {
        return Ok(OrderHypothesisReport::fails(
            ConditionId::InitialOrder,
            0,
            Witness {
                seed: 0,
                index: 0,
                times: vec![],
                points: vec![mx, my],
                violation: (mx - my).abs(),
                detail: "means differ".into(),
            },
        ));
    }
    let (ax, bx) = law_range(x0);
    let (ay, by) = (law_range(y0).0, law_range(y0).1);
    let (lo, hi) = (ax.min(ay) - 1.0, bx.max(by) + 1.0);
    let n = strikes.max(2);
    for i in 0..n {
        let k = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let (cx, cy) = (stop_loss(x0, k)?, stop_loss(y0, k)?);
        let excess = match order {
            OrderKind::Cvx | OrderKind::Icv => cx - cy,
            // E (K - X)^+ = E (X - K)^+ - E X + K
            OrderKind::Dcv => (cx - mx) - (cy - my),
        };
        if excess > tol * scale {
            return Ok(OrderHypothesisReport::fails(
                ConditionId::InitialOrder,
                i + 1,
                Witness {
                    seed: 0,
                    index: i,
                    times: vec![],
                    points: vec![k],
                    violation: excess,
                    detail: "stop-loss transform comparison fails at this strike".into(),
                },
            ));
        }
    }
    Ok(OrderHypothesisReport::holds(ConditionId::InitialOrder, n))
}
