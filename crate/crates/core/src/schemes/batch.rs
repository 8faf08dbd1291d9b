use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::grid::{SchemeKind, TimeGrid};

/// Simulated grid paths of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub grid: TimeGrid,
    pub dim_d: usize,
    pub num_paths: usize,
    /// `num_paths × (n + 1) × d`, row-major.
    pub paths: Vec<f64>,
    pub master_seed: u64,
    pub scheme: SchemeKind,
    pub metadata: serde_json::Value,
}

impl PathBatch {
    /// Grid values of path `p`, `(n + 1) × d` row-major.
    pub fn path(&self, p: usize) -> &[f64] {
        let row = (self.grid.n + 1) * self.dim_d;
        &self.paths[p * row..(p + 1) * row]
    }

    /// Coordinate `i` of path `p` at `t_k`.
    pub fn value(&self, p: usize, k: usize, i: usize) -> f64 {
        self.path(p)[k * self.dim_d + i]
    }

    /// First coordinate of path `p` at `T`.
    pub fn terminal(&self, p: usize) -> f64 {
        self.value(p, self.grid.n, 0)
    }

    /// First coordinate of every path at `t_k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.num_paths).map(|p| self.value(p, k, 0)).collect()
    }

    /// Errors unless `other` lives on the same grid with as many paths.
    pub fn check_compatible(&self, other: &PathBatch) -> Result<()> {
        if self.grid != other.grid || self.dim_d != other.dim_d || self.num_paths != other.num_paths {
            return Err(Error::GridMismatch(format!(
                "batches differ: (n = {}, T = {}, d = {}, paths = {}) vs (n = {}, T = {}, d = {}, paths = {})",
                self.grid.n,
                self.grid.horizon,
                self.dim_d,
                self.num_paths,
                other.grid.n,
                other.grid.horizon,
                other.dim_d,
                other.num_paths
            )));
        }
        Ok(())
    }

    /// Writes `path,k,t,x_1..x_d` rows with 17 significant digits.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let mut header = String::from("path,k,t");
        for i in 1..=self.dim_d {
            header.push_str(&format!(",x_{i}"));
        }
        writeln!(w, "{header}")?;
        let times = self.grid.times();
        for p in 0..self.num_paths {
            let path = self.path(p);
            for (k, t) in times.iter().enumerate() {
                write!(w, "{p},{k},{t:.16e}")?;
                for x in &path[k * self.dim_d..(k + 1) * self.dim_d] {
                    write!(w, ",{x:.16e}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    /// JSON sidecar: grid, seed, scheme and the simulation metadata.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": self.grid,
            "dim_d": self.dim_d,
            "num_paths": self.num_paths,
            "master_seed": self.master_seed,
            "scheme": self.scheme,
            "metadata": self.metadata,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let file = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        let body = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        std::fs::write(dir.join(format!("{stem}.json")), body + "\n")?;
        Ok(())
    }
}
