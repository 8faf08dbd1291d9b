//! Fixed-order reductions and estimators.

use serde::Serialize;

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (cascade) sum with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut s = 0.0;
        for x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(x)` over `xs`.
pub fn pairwise_sum_map(xs: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut s = 0.0;
        for x in xs {
            s += f(*x);
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum_map(&xs[..mid], f) + pairwise_sum_map(&xs[mid..], f)
}

/// Sample mean, its standard error, and the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedStats {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Mean and standard error `sd / √n` of a sample.
///
/// Data are shifted by their first element before the two-pass variance, so
/// a constant sample gives exactly that constant and a zero standard error.
pub fn paired_stats(diffs: &[f64]) -> Result<PairedStats> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let shift = diffs[0];
    let nf = n as f64;
    let centred_mean = pairwise_sum_map(diffs, |x| x - shift) / nf;
    let ss = pairwise_sum_map(diffs, |x| {
        let d = x - shift - centred_mean;
        d * d
    });
    let var = ss / (nf - 1.0);
    Ok(PairedStats {
        mean: shift + centred_mean,
        se: (var / nf).sqrt(),
        n,
    })
}

/// Sample moments with standard errors of the shape statistics under normality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of `variance`, from the fourth central moment.
    pub variance_se: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `√(6/n)`.
    pub skewness_se: f64,
    /// `√(24/n)`.
    pub kurtosis_se: f64,
}

pub fn moments(xs: &[f64]) -> Result<Moments> {
    let n = xs.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let nf = n as f64;
    let mean = pairwise_sum(xs) / nf;
    let m2 = pairwise_sum_map(xs, |x| (x - mean).powi(2)) / nf;
    let m3 = pairwise_sum_map(xs, |x| (x - mean).powi(3)) / nf;
    let m4 = pairwise_sum_map(xs, |x| (x - mean).powi(4)) / nf;
    let variance = m2 * nf / (nf - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(Moments {
        n,
        mean,
        variance,
        variance_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        skewness,
        excess_kurtosis,
        skewness_se: (6.0 / nf).sqrt(),
        kurtosis_se: (24.0 / nf).sqrt(),
    })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    /// OLS standard error of the slope; zero for two points.
    pub slope_se: f64,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension(format!(
            "loglog_fit needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("loglog_fit needs positive finite data, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let nf = lx.len() as f64;
    let mx = pairwise_sum(&lx) / nf;
    let my = pairwise_sum(&ly) / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("loglog_fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = if lx.len() > 2 {
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LogLogFit {
        slope,
        intercept,
        residual: (rss / nf).sqrt(),
        slope_se,
    })
}
