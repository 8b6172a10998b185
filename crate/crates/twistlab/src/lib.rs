//! twistlab: a desk-scale spectral laboratory for waveguides whose
//! cross-section and twisting support shrink together.
//!
//! The crate builds the transverse Dirichlet eigenproblem on a non-circular
//! cross-section, compactly supported twist-velocity profiles with their
//! singular scalings, the 1D oscillator operators (with and without a point
//! Dirichlet condition at the origin), the mixed-basis waveguide operators,
//! the Birman-Schwinger kernel expansion, and the convergence sweeps that tie
//! them together.
//!
//! Parallelism: sweeps over the scale parameter are data-parallel. With the
//! default `parallel` feature the rows run on rayon; without it everything is
//! sequential. Rows are internally sequential either way, so reports are
//! byte-identical across thread counts.

pub mod error;
pub mod green;
pub mod numerics;
pub mod oscillator;
pub mod transverse;
pub mod twist;

pub use error::{Error, Result};
