//! Small dense Hermitian helpers on top of faer.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest entrywise deviation from Hermitian symmetry.
pub fn asymmetry(a: &Mat<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in ascending order and the matching eigenvectors.
pub fn hermitian_eigen(a: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|err| Error::InvalidInput(format!("eigendecomposition failed: {err:?}")))?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|j| s[j].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.0)
}

/// `U diag(w) U^H` restricted to the columns listed in `cols`.
pub fn reconstruct(u: &Mat<Complex64>, w: &[f64], cols: &[usize]) -> Mat<Complex64> {
    let n = u.nrows();
    let mut scaled = Mat::<Complex64>::zeros(n, cols.len());
    let mut plain = Mat::<Complex64>::zeros(n, cols.len());
    for (c, &j) in cols.iter().enumerate() {
        for i in 0..n {
            plain[(i, c)] = u[(i, j)];
            scaled[(i, c)] = u[(i, j)] * w[j];
        }
    }
    &scaled * plain.adjoint()
}

pub fn frobenius(a: &Mat<Complex64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}
