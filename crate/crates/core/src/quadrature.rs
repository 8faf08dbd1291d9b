//! Quadrature rules used to build kernel cell integrals and covariances.
//!
//! Three tools live here:
//! * fixed-order Gauss–Legendre on a finite interval (nodes by Newton iteration),
//! * a dyadically graded composite Gauss–Legendre rule for integrands with an
//!   algebraic endpoint singularity (or a near-singularity) at the left end,
//! * adaptive 10/21-point Gauss–Kronrod with bisection, the generic fallback
//!   for user-supplied kernels.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn order64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    /// Shared 16-point rule used per panel by the graded rule.
    pub fn order16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Number of dyadic panels used by [`graded_left`].
pub const GRADED_LEVELS: usize = 48;

/// Integrates `f` over `[0, len]` with panels `[len 2^{-m-1}, len 2^{-m}]`,
/// `m = 0..GRADED_LEVELS`, plus the innermost panel `[0, len 2^{-GRADED_LEVELS}]`,
/// each with a 16-point Gauss–Legendre rule. Suited to integrands that behave
/// like `x^p * smooth(x)` or `(c + x)^p` with small `c` near the left end.
pub fn graded_left<F: FnMut(f64) -> f64>(len: f64, mut f: F) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let rule = GaussLegendre::order16();
    let mut acc = 0.0;
    let mut hi = len;
    for _ in 0..GRADED_LEVELS {
        let lo = 0.5 * hi;
        acc += rule.integrate(lo, hi, &mut f);
        hi = lo;
    }
    acc + rule.integrate(0.0, hi, &mut f)
}

// Kronrod 21-point extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn kronrod21<F: FnMut(f64) -> f64>(lo: f64, hi: f64, f: &mut F) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut resk = fc * WGK21[10];
    let mut resg = 0.0;
    for (j, (&x, &w)) in XGK21[..10].iter().zip(&WGK21[..10]).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        resk += w * s;
        if j % 2 == 1 {
            resg += WG10[j / 2] * s;
        }
    }
    let result = resk * half;
    let err = ((resk - resg) * half).abs();
    (result, err)
}

/// Adaptive Gauss–Kronrod (10/21) with bisection of the worst interval.
///
/// Stops when the summed error estimate is below `rel_tol * |estimate|` (or
/// `abs_floor`), and fails with [`Error::Quadrature`] once `max_intervals` is
/// exhausted.
pub fn adaptive_gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_intervals: usize,
) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let (r, e) = kronrod21(lo, hi, &mut f);
    let mut intervals = vec![(lo, hi, r, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                error: err,
            });
        }
        if err <= (rel_tol * total.abs()).max(abs_floor) {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                error: err,
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, iv)| {
                if iv.3 > acc.1 {
                    (i, iv.3)
                } else {
                    acc
                }
            });
        let (a, b, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                error: err,
            });
        }
        let (r1, e1) = kronrod21(a, m, &mut f);
        let (r2, e2) = kronrod21(m, b, &mut f);
        intervals.push((a, m, r1, e1));
        intervals.push((m, b, r2, e2));
    }
}
