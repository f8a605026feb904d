//! The triple Dirichlet kernel, its 2-D product and derivatives up to order 3.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Frequency2D;

/// Bandwidth fractions of the three Dirichlet factors.
pub const GAMMA: [f64; 3] = [0.247, 0.339, 0.414];

pub const MAX_ORDER: usize = 3;

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    Ok(())
}

/// Accumulates `sum_k w_k (j 2 pi k)^p e^{j 2 pi k f}` for a real even sequence
/// `w` given on `k = 0..=len-1`, all orders `p = 0..=3` at once. The result is
/// real because the imaginary parts cancel between `k` and `-k`.
fn even_series(w: &[f64], f: f64) -> [f64; 4] {
    let mut out = [w[0], 0.0, 0.0, 0.0];
    for (k, &wk) in w.iter().enumerate().skip(1) {
        if wk == 0.0 {
            continue;
        }
        let t = TAU * k as f64;
        let (s, c) = (t * f).sin_cos();
        let a = 2.0 * wk;
        out[0] += a * c;
        out[1] -= a * t * s;
        out[2] -= a * t * t * c;
        out[3] += a * t * t * t * s;
    }
    out
}

/// Derivative of order `order` of `(2 mbar + 1)^{-1} sum_{|k| <= mbar} e^{j 2 pi k f}`.
pub fn dirichlet_eval(mbar: usize, f: f64, order: usize) -> Result<Complex64> {
    check_order(order)?;
    if mbar < 1 {
        return Err(Error::InvalidInput("Dirichlet half-bandwidth must be at least 1".into()));
    }
    let w = vec![1.0 / (2 * mbar + 1) as f64; mbar + 1];
    Ok(Complex64::new(even_series(&w, f)[order], 0.0))
}

/// Fourier coefficients `c_k`, `k = -m..=m`, of the triple kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCoeffs {
    m: usize,
    widths: [usize; 3],
    c: Vec<f64>,
}

impl KernelCoeffs {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Half-bandwidths of the three Dirichlet factors.
    pub fn widths(&self) -> [usize; 3] {
        self.widths
    }

    /// Last index where `c` may be nonzero.
    pub fn support(&self) -> usize {
        self.widths.iter().sum()
    }

    /// `c_k` for `|k| <= m`; zero beyond the convolution support.
    pub fn get(&self, k: i64) -> f64 {
        let m = self.m as i64;
        if k.abs() > m {
            return 0.0;
        }
        self.c[(k + m) as usize]
    }

    /// All coefficients ordered `k = -m..=m`.
    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `K^(p)(f)` for `p = 0..=3`.
    pub fn eval_all(&self, f: f64) -> [f64; 4] {
        let m = self.m;
        even_series(&self.c[m..=m + self.support()], f)
    }
}

/// Half-bandwidths `floor(gamma_i m)`, shrinking the largest while the sum
/// exceeds `m`.
pub fn triple_widths(m: usize) -> Result<[usize; 3]> {
    let mut w = GAMMA.map(|g| (g * m as f64).floor() as usize);
    while w.iter().sum::<usize>() > m {
        let i = (0..3).max_by_key(|&i| w[i]).unwrap();
        w[i] -= 1;
    }
    if w.iter().any(|&x| x < 1) {
        return Err(Error::UnsupportedBandwidth(m));
    }
    Ok(w)
}

pub fn triple_kernel_coeffs(m: usize) -> Result<KernelCoeffs> {
    let widths = triple_widths(m)?;
    let mut acc = vec![1.0];
    for &w in &widths {
        let h = 1.0 / (2 * w + 1) as f64;
        let mut next = vec![0.0; acc.len() + 2 * w];
        for (i, &a) in acc.iter().enumerate() {
            for slot in &mut next[i..=i + 2 * w] {
                *slot += a * h;
            }
        }
        acc = next;
    }
    let half = (acc.len() - 1) / 2;
    let mut c = vec![0.0; 2 * m + 1];
    c[m - half..=m + half].copy_from_slice(&acc);
    // enforce exact even symmetry
    for k in 1..=half {
        let v = 0.5 * (c[m + k] + c[m - k]);
        c[m + k] = v;
        c[m - k] = v;
    }
    Ok(KernelCoeffs { m, widths, c })
}

/// `sum_k c_k (j 2 pi k)^order e^{j 2 pi k f}`.
pub fn kernel_eval_1d(coeffs: &KernelCoeffs, f: f64, order: usize) -> Result<Complex64> {
    check_order(order)?;
    Ok(Complex64::new(coeffs.eval_all(f)[order], 0.0))
}

/// `K^{(i1)}(f1) K^{(i2)}(f2)`.
pub fn kernel_eval_2d(coeffs: &KernelCoeffs, f: Frequency2D, i1: usize, i2: usize) -> Result<Complex64> {
    kernel_eval_2d_at(coeffs, f.f1, f.f2, i1, i2)
}

/// As [`kernel_eval_2d`] at an unwrapped displacement.
pub fn kernel_eval_2d_at(coeffs: &KernelCoeffs, g1: f64, g2: f64, i1: usize, i2: usize) -> Result<Complex64> {
    check_order(i1)?;
    check_order(i2)?;
    Ok(Complex64::new(coeffs.eval_all(g1)[i1] * coeffs.eval_all(g2)[i2], 0.0))
}

/// `1 / sqrt(|K''(0)|)`.
pub fn kappa(coeffs: &KernelCoeffs) -> Result<f64> {
    let k2 = coeffs.eval_all(0.0)[2];
    if k2 == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    Ok(1.0 / k2.abs().sqrt())
}
