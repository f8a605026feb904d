//! Bivariate trigonometric polynomials on the symmetric index set.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{grid_index, grid_position, half_width, phasors, Frequency2D, Index2, SampleGrid};

/// Sign of the exponent in `sum_k C_k e^{+-j 2 pi f.k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

/// Value, gradient and Hessian of a polynomial at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    pub value: Complex64,
    pub d10: Complex64,
    pub d01: Complex64,
    pub d20: Complex64,
    pub d11: Complex64,
    pub d02: Complex64,
}

impl Derivatives {
    /// Gradient and Hessian of `|Q|^2`.
    pub fn modulus_sq_grad_hess(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let q = self.value;
        let g = [self.d10, self.d01];
        let h = [[self.d20, self.d11], [self.d11, self.d02]];
        let grad = [2.0 * (q.conj() * g[0]).re, 2.0 * (q.conj() * g[1]).re];
        let mut hess = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                hess[a][b] = 2.0 * (h[a][b] * q.conj() + g[a] * g[b].conj()).re;
            }
        }
        (grad, hess)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly2D {
    n: usize,
    coeffs: Vec<Complex64>,
    polarity: Polarity,
}

impl TrigPoly2D {
    /// Coefficients laid out like [`SampleGrid`].
    pub fn new(n: usize, coeffs: Vec<Complex64>, polarity: Polarity) -> Result<Self> {
        half_width(n)?;
        if coeffs.len() != n * n {
            return Err(Error::DimensionMismatch(coeffs.len(), n * n));
        }
        Ok(TrigPoly2D { n, coeffs, polarity })
    }

    pub fn zeros(n: usize, polarity: Polarity) -> Result<Self> {
        TrigPoly2D::new(n, vec![Complex64::new(0.0, 0.0); n * n], polarity)
    }

    pub fn from_grid(grid: &SampleGrid, polarity: Polarity) -> Self {
        TrigPoly2D {
            n: grid.n(),
            coeffs: grid.as_slice().to_vec(),
            polarity,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i64 {
        ((self.n - 1) / 2) as i64
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: Index2) -> Complex64 {
        self.coeffs[grid_position(self.n, k)]
    }

    pub fn set_coeff(&mut self, k: Index2, v: Complex64) {
        self.coeffs[grid_position(self.n, k)] = v;
    }

    pub fn to_grid(&self) -> SampleGrid {
        SampleGrid::from_vec(self.n, self.coeffs.clone()).expect("validated at construction")
    }

    fn weighted_phasors(&self, f: f64, order: usize) -> Vec<Complex64> {
        let s = self.polarity.sign();
        let m = self.m();
        phasors(f, m, s)
            .into_iter()
            .zip(-m..=m)
            .map(|(e, k)| e * Complex64::new(0.0, s * TAU * k as f64).powu(order as u32))
            .collect()
    }

    fn contract(&self, u1: &[Complex64], u2: &[Complex64]) -> Complex64 {
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, w2) in u2.iter().enumerate() {
            let col = &self.coeffs[b * n..(b + 1) * n];
            let inner: Complex64 = col.iter().zip(u1).map(|(c, w1)| c * w1).sum();
            acc += inner * w2;
        }
        acc
    }

    /// Partial derivative of order `(i1, i2)` at `f`.
    pub fn eval(&self, f: Frequency2D, i1: usize, i2: usize) -> Complex64 {
        self.eval_at(f.f1, f.f2, i1, i2)
    }

    pub fn eval_at(&self, f1: f64, f2: f64, i1: usize, i2: usize) -> Complex64 {
        self.contract(&self.weighted_phasors(f1, i1), &self.weighted_phasors(f2, i2))
    }

    pub fn derivatives(&self, f: Frequency2D) -> Derivatives {
        let a: Vec<_> = (0..3).map(|p| self.weighted_phasors(f.f1, p)).collect();
        let b: Vec<_> = (0..3).map(|p| self.weighted_phasors(f.f2, p)).collect();
        Derivatives {
            value: self.contract(&a[0], &b[0]),
            d10: self.contract(&a[1], &b[0]),
            d01: self.contract(&a[0], &b[1]),
            d20: self.contract(&a[2], &b[0]),
            d11: self.contract(&a[1], &b[1]),
            d02: self.contract(&a[0], &b[2]),
        }
    }

    /// Values of the `(i1, i2)` derivative at `f = (p1/P, p2/P)`, stored at
    /// `p2 * P + p1`. Coefficients are folded modulo `P`, so any `P >= 1`
    /// gives exact node values.
    pub fn grid(&self, points: usize, i1: usize, i2: usize) -> Vec<Complex64> {
        let s = self.polarity.sign();
        let mut buf = vec![Complex64::new(0.0, 0.0); points * points];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = grid_index(self.n, i);
            let w = Complex64::new(0.0, s * TAU * k.k1 as f64).powu(i1 as u32)
                * Complex64::new(0.0, s * TAU * k.k2 as f64).powu(i2 as u32);
            let p1 = k.k1.rem_euclid(points as i64) as usize;
            let p2 = k.k2.rem_euclid(points as i64) as usize;
            buf[p2 * points + p1] += c * w;
        }
        fft2(&mut buf, points, self.polarity);
        buf
    }

    /// `|Q|` on the uniform grid, laid out as in [`TrigPoly2D::grid`].
    pub fn abs_grid(&self, points: usize) -> Vec<f64> {
        self.grid(points, 0, 0).iter().map(|v| v.norm()).collect()
    }

    /// Newton ascent on `|Q|^2` from `start`. Stops when the Hessian is not
    /// negative definite, a step would exceed `max_step` in either axis, the
    /// modulus would decrease, or after `iters` steps.
    pub fn refine_peak(&self, start: Frequency2D, max_step: f64, iters: usize) -> (Frequency2D, f64) {
        let mut f = start;
        let mut val = self.eval(f, 0, 0).norm();
        for _ in 0..iters {
            let (g, h) = self.derivatives(f).modulus_sq_grad_hess();
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if !(h[0][0] < 0.0 && det > 0.0) {
                break;
            }
            let s1 = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
            let s2 = -(h[0][0] * g[1] - h[1][0] * g[0]) / det;
            if s1.abs().max(s2.abs()) > max_step {
                break;
            }
            let next = f.offset(s1, s2);
            let next_val = self.eval(next, 0, 0).norm();
            if next_val < val {
                break;
            }
            f = next;
            val = next_val;
            if s1.abs().max(s2.abs()) < 1e-15 {
                break;
            }
        }
        (f, val)
    }
}

/// In-place 2-D DFT of a `P x P` array with the first axis contiguous.
/// `Negative` computes `sum x e^{-j..}`, `Positive` the unnormalized inverse.
fn fft2(buf: &mut [Complex64], points: usize, polarity: Polarity) {
    let mut planner = FftPlanner::new();
    let fft = match polarity {
        Polarity::Negative => planner.plan_fft_forward(points),
        Polarity::Positive => planner.plan_fft_inverse(points),
    };
    fft.process(buf);
    transpose(buf, points);
    fft.process(buf);
    transpose(buf, points);
}

fn transpose(buf: &mut [Complex64], p: usize) {
    for i in 0..p {
        for j in (i + 1)..p {
            buf.swap(i * p + j, j * p + i);
        }
    }
}
