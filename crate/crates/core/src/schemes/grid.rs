use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of steps accepted by default (dense `O(n^2)` tables).
pub const MAX_STEPS: usize = 1 << 14;

/// Which of the two Euler schemes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Kernels frozen at the left end of each cell.
    #[serde(rename = "k-discrete")]
    KDiscrete,
    /// Kernels integrated exactly over each cell.
    #[serde(rename = "k-integrated")]
    KIntegrated,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::KDiscrete => "k-discrete",
            SchemeKind::KIntegrated => "k-integrated",
        }
    }
}

/// Uniform grid `t_k = k T / n`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub n: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl TimeGrid {
    pub fn new(n: usize, horizon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("grid needs n >= 1".into()));
        }
        if n > MAX_STEPS {
            return Err(Error::Domain(format!("grid size n = {n} exceeds the cap {MAX_STEPS}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T must be positive and finite (got {horizon})")));
        }
        Ok(Self { n, horizon })
    }

    /// Re-checks the invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.n, self.horizon).map(|_| ())
    }

    /// `T / n`.
    #[inline]
    pub fn step(&self) -> f64 {
        self.horizon / self.n as f64
    }

    /// `t_k`, with `t_0 = 0` and `t_n = T` exactly.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n {
            self.horizon
        } else {
            k as f64 * self.horizon / self.n as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.time(k)).collect()
    }

    /// Index `k` with `t_k <= t < t_{k+1}` (clamped to `n - 1` at `t = T`),
    /// and whether `t` is a grid point.
    pub fn locate(&self, t: f64) -> Result<(usize, bool)> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let mut k = ((t / self.horizon) * self.n as f64).floor() as usize;
        k = k.min(self.n);
        while k > 0 && self.time(k) > t {
            k -= 1;
        }
        while k < self.n && self.time(k + 1) <= t {
            k += 1;
        }
        let on_grid = self.time(k) == t;
        Ok((k, on_grid))
    }

    /// Ratio `fine.n / self.n` when both grids share `T` and `self` divides `fine`.
    pub fn refinement_ratio(&self, fine: &TimeGrid) -> Option<usize> {
        if self.horizon != fine.horizon || fine.n % self.n != 0 {
            return None;
        }
        Some(fine.n / self.n)
    }
}
