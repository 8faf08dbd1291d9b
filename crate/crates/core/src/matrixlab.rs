//! Dense symmetric-matrix utilities.
//!
//! Tolerances are relative to `trace / dim` of the matrix under test.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default relative tolerance for PSD and Loewner checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Which branch of [`factor_psd`] produced the factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorMethod {
    Cholesky,
    SymmetricSqrt,
}

/// A factor `L` with `L L^* ≈ Σ`.
#[derive(Debug, Clone)]
pub struct SymFactor {
    pub matrix_dim: usize,
    /// Lower triangular for Cholesky, symmetric for the square root.
    pub factor: DMatrix<f64>,
    pub method: FactorMethod,
    /// Frobenius norm of `L L^* - Σ`.
    pub reconstruction_error: f64,
}

/// `trace / dim`, or 1 when the trace vanishes.
pub fn tolerance_scale(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows().max(1) as f64;
    let s = m.trace().abs() / d;
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

fn check_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>, tol: f64, what: &str) -> Result<()> {
    let scale = tolerance_scale(m);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return Err(Error::Domain(format!(
                    "{what} is not symmetric at ({i}, {j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Cholesky factor, or `None` at the first non-positive pivot.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrized(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric PSD square root with negative eigenvalues clipped to zero, and
/// the smallest eigenvalue before clipping.
pub fn sym_sqrt(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let eig = SymmetricEigen::new(symmetrized(m));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, r) in roots.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*r);
    }
    let root = symmetrized(&(scaled * v.transpose()));
    (root, min)
}

fn reconstruction_error(l: &DMatrix<f64>, sigma: &DMatrix<f64>) -> f64 {
    (l * l.transpose() - sigma).norm()
}

/// Factors a symmetric PSD matrix as `L L^*`.
///
/// Tries Cholesky first; a non-positive pivot, or a reconstruction error
/// above `1e-8 (1 + ‖Σ‖_F)`, switches to the symmetric square root.
pub fn factor_psd(sigma: &DMatrix<f64>, tol: f64) -> Result<SymFactor> {
    check_square(sigma, "covariance")?;
    check_symmetric(sigma, tol, "covariance")?;
    let dim = sigma.nrows();
    let bound = 1e-8 * (1.0 + sigma.norm());
    if let Some(l) = cholesky_lower(sigma) {
        let err = reconstruction_error(&l, sigma);
        if err <= bound {
            return Ok(SymFactor {
                matrix_dim: dim,
                factor: l,
                method: FactorMethod::Cholesky,
                reconstruction_error: err,
            });
        }
    }
    let (root, min) = sym_sqrt(sigma);
    let threshold = tol * tolerance_scale(sigma);
    if min < -threshold {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            threshold,
        });
    }
    let err = reconstruction_error(&root, sigma);
    Ok(SymFactor {
        matrix_dim: dim,
        factor: root,
        method: FactorMethod::SymmetricSqrt,
        reconstruction_error: err,
    })
}

/// `S ≤ U` in the Loewner order: `U - S` is PSD up to `tol * trace/dim`.
pub fn loewner_leq(s: &DMatrix<f64>, u: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(loewner_gap(s, u, tol)? >= 0.0)
}

/// Smallest eigenvalue of `U - S` plus the tolerance allowance; negative iff
/// `S ≤ U` fails.
pub fn loewner_gap(s: &DMatrix<f64>, u: &DMatrix<f64>, tol: f64) -> Result<f64> {
    check_square(s, "S")?;
    check_square(u, "U")?;
    if s.nrows() != u.nrows() {
        return Err(Error::Dimension(format!(
            "Loewner comparison of {}x{} and {}x{}",
            s.nrows(),
            s.ncols(),
            u.nrows(),
            u.ncols()
        )));
    }
    check_symmetric(s, tol, "S")?;
    check_symmetric(u, tol, "U")?;
    let diff = u - s;
    let scale = tolerance_scale(s).max(tolerance_scale(u));
    Ok(min_eigenvalue(&diff) + tol * scale)
}

/// Kronecker product `[A_ij B]`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Whether `A A^* = B B^*` up to `tol * trace/dim`, which is equivalent to
/// `A = B O` for some orthogonal `O`.
pub fn same_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "same_gram needs equal shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let ga = a * a.transpose();
    let gb = b * b.transpose();
    let scale = tolerance_scale(&ga).max(tolerance_scale(&gb));
    Ok((ga - gb).norm() <= tol * scale)
}
