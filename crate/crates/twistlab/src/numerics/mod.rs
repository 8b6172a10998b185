//! Shared numerical kernels: tridiagonal and block-tridiagonal direct solvers,
//! Sturm-sequence eigenvalue bisection, Lanczos extreme-eigenvalue estimation
//! with certified residuals, inverse subspace iteration, conjugate gradients,
//! quadrature and log-log rate fitting.
//!
//! Everything here is deterministic: fixed seeds, fixed orderings, no
//! wall-clock or thread-count dependence.

pub mod block;
pub mod cg;
pub mod fit;
pub mod interp;
pub mod lanczos;
pub mod quad;
pub mod rng;
pub mod subspace;
pub mod tridiag;
