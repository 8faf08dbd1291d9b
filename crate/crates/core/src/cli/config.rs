//! JSON run configuration. Unknown keys are rejected and every default is
//! written out by `--print-config`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelRole, KernelSpec};
use crate::models::{ConvexFunctionalFamily, OrderKind, PathFunctional, QuadraticRoughHeston, TargetCurve};
use crate::ordering::SamplerConfig;
use crate::schemes::{CoefficientSet, InitialCondition, SchemeKind, TimeGrid};

/// A scalar function of the state, `x ↦ g(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFnSpec {
    /// `value`.
    Constant { value: f64 },
    /// `a + b x`.
    Affine { a: f64, b: f64 },
    /// `a + b |x|`.
    AbsAffine { a: f64, b: f64 },
    /// `a + b sin x`.
    SinAffine { a: f64, b: f64 },
    /// `scale √|x|`.
    SqrtAbs { scale: f64 },
    /// `a + b x + c x^2`.
    Quadratic { a: f64, b: f64, c: f64 },
}

impl ScalarFnSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ScalarFnSpec::Constant { value } => value,
            ScalarFnSpec::Affine { a, b } => a + b * x,
            ScalarFnSpec::AbsAffine { a, b } => a + b * x.abs(),
            ScalarFnSpec::SinAffine { a, b } => a + b * x.sin(),
            ScalarFnSpec::SqrtAbs { scale } => scale * x.abs().sqrt(),
            ScalarFnSpec::Quadratic { a, b, c } => a + x * (b + c * x),
        }
    }

    /// `(μ, ν)` when `g(x) = μ + ν x`.
    pub fn affine_parts(&self) -> Option<(f64, f64)> {
        match *self {
            ScalarFnSpec::Constant { value } => Some((value, 0.0)),
            ScalarFnSpec::Affine { a, b } => Some((a, b)),
            ScalarFnSpec::Quadratic { a, b, c } if c == 0.0 => Some((a, b)),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScalarFnSpec::Constant { value } => value.is_finite(),
            ScalarFnSpec::Affine { a, b } | ScalarFnSpec::AbsAffine { a, b } | ScalarFnSpec::SinAffine { a, b } => {
                a.is_finite() && b.is_finite()
            }
            ScalarFnSpec::SqrtAbs { scale } => scale.is_finite(),
            ScalarFnSpec::Quadratic { a, b, c } => a.is_finite() && b.is_finite() && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("non-finite coefficient parameter in {self:?}")))
        }
    }
}

/// One-dimensional coefficients `b(x)` and `σ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub drift: ScalarFnSpec,
    pub diffusion: ScalarFnSpec,
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self {
            drift: ScalarFnSpec::Constant { value: 0.0 },
            diffusion: ScalarFnSpec::Constant { value: 1.0 },
        }
    }
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<CoefficientSet> {
        self.drift.validate()?;
        self.diffusion.validate()?;
        let sigma = self.diffusion;
        let meta = serde_json::to_value(self).expect("coefficient spec serializes");
        let c = match self.drift.affine_parts() {
            Some((mu, nu)) => CoefficientSet::affine_scalar(move |_| mu, move |_| nu, move |_, x| sigma.eval(x)),
            None => {
                let b = self.drift;
                CoefficientSet::scalar(move |_, x| b.eval(x), move |_, x| sigma.eval(x))
            }
        };
        Ok(c.with_metadata(meta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPair {
    pub k1: KernelSpec,
    pub k2: KernelSpec,
}

impl Default for KernelPair {
    fn default() -> Self {
        Self {
            k1: KernelSpec::Constant { value: 1.0 },
            k2: KernelSpec::Constant { value: 1.0 },
        }
    }
}

impl KernelPair {
    pub fn build(&self) -> Result<(Arc<dyn Kernel>, Arc<dyn Kernel>)> {
        Ok((self.k1.build_for(KernelRole::Drift)?, self.k2.build_for(KernelRole::Diffusion)?))
    }
}

/// Quadratic rough Heston parameters; the target curve is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub a: f64,
    pub b_center: f64,
    pub c: f64,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub lambda: f64,
    pub sigma_vol: f64,
    pub f: f64,
    pub z0: f64,
}

impl ModelSpec {
    pub fn build(&self) -> Result<QuadraticRoughHeston> {
        let m = QuadraticRoughHeston {
            a: self.a,
            b_center: self.b_center,
            c: self.c,
            hurst: self.hurst,
            lambda: self.lambda,
            sigma_vol: self.sigma_vol,
            f: TargetCurve::constant(self.f),
            z0: self.z0,
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VixSection {
    /// Extra `sigma_vol` values priced with the same seed.
    pub sigma_vol_sweep: Vec<f64>,
}

impl Default for VixSection {
    fn default() -> Self {
        Self { sigma_vol_sweep: vec![] }
    }
}

/// Members of the test family: functional kinds and call/put strikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Any of `sup-norm`, `call`, `put`, `terminal`, `neg-terminal`,
    /// `running-max`, `neg-running-min`, `integral-square`, `integral-abs`,
    /// `integral-positive-part`.
    pub include: Vec<String>,
    pub strikes: Vec<f64>,
}

pub const FUNCTIONAL_KINDS: [&str; 10] = [
    "sup-norm",
    "call",
    "put",
    "terminal",
    "neg-terminal",
    "running-max",
    "neg-running-min",
    "integral-square",
    "integral-abs",
    "integral-positive-part",
];

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            include: FUNCTIONAL_KINDS.iter().map(|s| s.to_string()).collect(),
            strikes: vec![0.0, 0.5, 1.0],
        }
    }
}

impl FamilySpec {
    pub fn build(&self) -> Result<ConvexFunctionalFamily> {
        let mut fam = ConvexFunctionalFamily::default();
        for name in &self.include {
            match name.as_str() {
                "sup-norm" => fam.push(PathFunctional::sup_norm()),
                "call" => self.strikes.iter().for_each(|k| fam.push(PathFunctional::call(*k))),
                "put" => self.strikes.iter().for_each(|k| fam.push(PathFunctional::put(*k))),
                "terminal" => fam.push(PathFunctional::terminal()),
                "neg-terminal" => fam.push(PathFunctional::neg_terminal()),
                "running-max" => fam.push(PathFunctional::running_max()),
                "neg-running-min" => fam.push(PathFunctional::neg_running_min()),
                "integral-square" => fam.push(PathFunctional::integral_square()),
                "integral-abs" => fam.push(PathFunctional::integral_abs()),
                "integral-positive-part" => fam.push(PathFunctional::integral_positive_part()),
                other => {
                    return Err(Error::Config(format!(
                        "unknown functional {other:?}; expected one of {FUNCTIONAL_KINDS:?}"
                    )))
                }
            }
        }
        if fam.members.is_empty() {
            return Err(Error::Config("the functional family is empty".into()));
        }
        Ok(fam)
    }
}

/// The comparison process `Y`; a missing field means "same as X".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    pub kernels: Option<KernelPair>,
    pub coefficients: Option<CoefficientSpec>,
    pub init: Option<InitialCondition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSection {
    pub y: SideSpec,
    pub order: OrderKind,
    /// A functional is violated when its paired mean is below `-z` standard errors.
    pub z: f64,
    pub family: FamilySpec,
    /// Run the hypothesis checkers before the Monte Carlo test.
    pub check_hypotheses: bool,
}

impl Default for OrderSection {
    fn default() -> Self {
        Self {
            y: SideSpec::default(),
            order: OrderKind::Cvx,
            z: 4.0,
            family: FamilySpec::default(),
            check_hypotheses: true,
        }
    }
}

/// Sampler of the hypothesis checkers; the horizon is the grid's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub samples: usize,
    pub j_max: usize,
    pub radius: f64,
    pub tol: f64,
    pub seed: u64,
    /// Strikes of the initial-law comparison.
    pub initial_strikes: usize,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let d = SamplerConfig::default();
        Self {
            samples: d.samples,
            j_max: d.j_max,
            radius: d.radius,
            tol: d.tol,
            seed: d.seed,
            initial_strikes: 201,
        }
    }
}

impl SamplerSection {
    pub fn sampler(&self, horizon: f64) -> SamplerConfig {
        SamplerConfig {
            horizon,
            samples: self.samples,
            j_max: self.j_max,
            radius: self.radius,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    pub p: f64,
    pub n_list: Vec<usize>,
}

impl Default for RateSection {
    fn default() -> Self {
        Self {
            p: 2.0,
            n_list: vec![32, 64, 128, 256],
        }
    }
}

/// Full configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: TimeGrid,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeKind,
    #[serde(default)]
    pub kernels: KernelPair,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    #[serde(default = "default_init")]
    pub init: InitialCondition,
    #[serde(default = "default_num_paths")]
    pub num_paths: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// When present, `simulate` and `price-vix` use the model instead of
    /// `kernels` and `coefficients`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub vix: VixSection,
    #[serde(default)]
    pub order: OrderSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub rate: RateSection,
}

fn default_scheme() -> SchemeKind {
    SchemeKind::KDiscrete
}

fn default_init() -> InitialCondition {
    InitialCondition::point(0.0)
}

fn default_num_paths() -> usize {
    1000
}

fn default_output_dir() -> String {
    "out".to_string()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.grid.validate()?;
        Ok(cfg)
    }

    /// Canonical JSON used for the manifest hash. The output directory is
    /// left out so that a run can be reproduced elsewhere.
    pub fn canonical(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output_dir");
        }
        v
    }

    pub fn pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn require_paths(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::Config("num_paths must be positive".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<QuadraticRoughHeston> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a \"model\" section".into()))?
            .build()
    }

    /// Coefficients and kernels of `X`, from the model when one is given.
    pub fn x_side(&self) -> Result<(CoefficientSet, Arc<dyn Kernel>, Arc<dyn Kernel>)> {
        if let Some(m) = &self.model {
            let setup = crate::models::qrh_coefficients(&m.build()?)?;
            return Ok((setup.coeffs, setup.k1, setup.k2));
        }
        let (k1, k2) = self.kernels.build()?;
        Ok((self.coefficients.build()?, k1, k2))
    }

    /// Initial law of `X`; a model fixes it to `z0`.
    pub fn x_init(&self) -> InitialCondition {
        match &self.model {
            Some(m) => InitialCondition::point(m.z0),
            None => self.init.clone(),
        }
    }

    pub fn y_kernels(&self) -> KernelPair {
        self.order.y.kernels.unwrap_or(self.kernels)
    }

    pub fn y_coefficients(&self) -> CoefficientSpec {
        self.order.y.coefficients.unwrap_or(self.coefficients)
    }

    pub fn y_init(&self) -> InitialCondition {
        self.order.y.init.clone().unwrap_or_else(|| self.init.clone())
    }
}
