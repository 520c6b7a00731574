//! Spectral analysis of the dissipative one-speed slab transport operator.
//!
//! The crate discretizes the Birman–Schwinger operator `Q(z)`, builds the
//! characteristic function `S(z)`, locates eigenvalues and the spectral
//! singularity at zero, and checks every prediction against a direct
//! discrete-ordinates simulation of the evolution group.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discretize;
pub mod error;
pub mod linalg;
pub mod par;
pub mod quad;
pub mod roots;
pub mod spectra;
pub mod transport_sim;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
