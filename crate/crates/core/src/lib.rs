//! Robust two-dimensional line spectral estimation.
//!
//! Samples `Y = X + Z` on an `n x n` grid mix a sparse spectral measure `X`
//! with sparse spiky corruption `Z`. The dual of the TV-norm / l1 demixing
//! program is a semidefinite program over a bordered Gram matrix; its optimal
//! coefficients `C` give a dual polynomial whose unit-modulus peaks locate the
//! frequencies and whose saturated entries `|C_k| = lambda` locate the spikes.
//!
//! Modules:
//! - [`signal`]: ground truth sampling, synthesis, separation.
//! - [`kernels`]: the triple Dirichlet kernel and its derivatives.
//! - [`trigpoly`]: bivariate trigonometric polynomials and FFT grid evaluation.
//! - [`certificate`]: deterministic and random dual certificate construction.
//! - [`sdp`]: the dual SDP and an ADMM solver for it.
//! - [`recovery`]: support extraction, amplitude fit, scoring.
//! - [`harness`]: trials, phase-transition grids and artifacts.

pub mod certificate;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod recovery;
pub mod sdp;
pub mod signal;
pub mod trigpoly;

mod linalg;

pub use error::{Error, Result};
pub use num_complex::Complex64;
