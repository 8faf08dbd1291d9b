//! Euler schemes for stochastic Volterra equations
//!
//! ```text
//! X_t = X_0 + ∫_0^t K_1(t,s) b(s,X_s) ds + ∫_0^t K_2(t,s) σ(s,X_s) dW_s
//! ```
//!
//! with singular kernels such as `(t-s)^{H-1/2}`, together with Monte Carlo
//! tooling to check convex-order comparison results and strong convergence
//! rates.
//!
//! * [`kernels`]: kernels, grid-cell integrals, noise covariance matrices.
//! * [`matrixlab`]: PSD factorization, Loewner order, Kronecker products.
//! * [`schemes`]: the K-discrete and K-integrated schemes, extensions,
//!   companion processes, interpolation.
//! * [`models`]: quadratic rough Heston, VIX premium, convex test functionals.
//! * [`ordering`]: hypothesis checkers, paired order tests, convergence rates.
//! * [`engine`]: seeded streams, statistics, run manifests.
//! * [`cli`]: the `volterra` command-line front end.

pub mod cli;
pub mod engine;
pub mod error;
pub mod kernels;
pub mod matrixlab;
pub mod models;
pub mod ordering;
pub mod quadrature;
pub mod schemes;

pub use error::{Error, Result};
