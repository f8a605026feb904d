//! Dual certificates built from the triple kernel.
//!
//! The certificate is `Q(f) = sum_k C_k e^{-j 2 pi f.k}`. Off the spike support
//! its coefficients are `C_k = c_{k1} c_{k2} b(k)^* v`, where
//! `b(k) = [1; -j 2 pi kappa k1; -j 2 pi kappa k2] (x) [e^{-j 2 pi f_i.k}]_i`.
//! On the spike support `C_k = lambda r_l`. The vector `v` solves
//! `E v = [h; 0; 0] - lambda B r` with `E = sum_{k not in Omega} c c b b^*`,
//! which enforces `Q(f_i) = h_i` and a vanishing gradient at every atom.
//!
//! In kernel form the same polynomial is
//! `Q = sum_i alpha_i K(f - f_i) + beta1_i K^{10}(f - f_i) + beta2_i K^{01}(f - f_i) + R`
//! with `alpha = v_0`, `beta_1 = -kappa v_1`, `beta_2 = -kappa v_2` and `K` the
//! kernel restricted to the complement of the spike support.

pub mod bounds;
mod lab;
mod validate;

use std::collections::HashMap;
use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelCoeffs;
use crate::linalg::hermitian_eigen;
use crate::signal::{grid_index, Frequency2D, Index2};
use crate::trigpoly::{Polarity, TrigPoly2D};

pub use lab::{certificate_lab, LabConfig, LabReport, LabTrial};
pub use validate::{validate_certificate, ValidationOptions, ValidationReport};

/// Smallest admissible `lambda_min(E) / lambda_max(E)`.
pub const MIN_RCOND: f64 = 1e-10;

/// Unit-modulus signs on the atoms (`h`) and on the spikes (`rsign`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub h: Vec<Complex64>,
    pub rsign: Vec<Complex64>,
}

impl SignPattern {
    pub fn new(h: Vec<Complex64>, rsign: Vec<Complex64>) -> Result<Self> {
        for v in h.iter().chain(&rsign) {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("sign {v} is not unit modulus")));
            }
        }
        Ok(SignPattern { h, rsign })
    }

    /// Independent uniform phases.
    pub fn random<R: Rng + ?Sized>(r: usize, s: usize, rng: &mut R) -> Self {
        let mut draw = |len| {
            (0..len)
                .map(|_| Complex64::from_polar(1.0, TAU * rng.gen::<f64>()))
                .collect()
        };
        let h = draw(r);
        let rsign = draw(s);
        SignPattern { h, rsign }
    }
}

/// The interpolation system `E v = rhs`; rows and columns are ordered as
/// (value, d/df1, d/df2) blocks, each over the atoms.
#[derive(Clone, Debug)]
pub struct InterpolationSystem {
    pub e: Mat<Complex64>,
    pub rhs: Vec<Complex64>,
}

/// `b(k)`: exponentials `e^{-j 2 pi f_i.k}` weighted by `1`,
/// `-j 2 pi kappa k1` and `-j 2 pi kappa k2`.
pub fn build_b(k: Index2, freqs: &[Frequency2D], kappa: f64) -> Vec<Complex64> {
    let r = freqs.len();
    let mut b = vec![Complex64::new(0.0, 0.0); 3 * r];
    let w1 = Complex64::new(0.0, -TAU * kappa * k.k1 as f64);
    let w2 = Complex64::new(0.0, -TAU * kappa * k.k2 as f64);
    for (i, f) in freqs.iter().enumerate() {
        let e = exp_neg(*f, k);
        b[i] = e;
        b[r + i] = w1 * e;
        b[2 * r + i] = w2 * e;
    }
    b
}

fn exp_neg(f: Frequency2D, k: Index2) -> Complex64 {
    let t = crate::signal::wrap_unit(f.f1 * k.k1 as f64 + f.f2 * k.k2 as f64);
    Complex64::from_polar(1.0, -TAU * t)
}

fn deriv_weight(k: Index2, i1: usize, i2: usize) -> Complex64 {
    Complex64::new(0.0, -TAU * k.k1 as f64).powu(i1 as u32) * Complex64::new(0.0, -TAU * k.k2 as f64).powu(i2 as u32)
}

/// Derivative `(i1, i2)` of `sum_{k not in omega} c_{k1} c_{k2} e^{-j 2 pi g.k}`,
/// orders up to 3 per axis.
pub fn restricted_kernel(coeffs: &KernelCoeffs, omega: &[Index2], g1: f64, g2: f64, i1: usize, i2: usize) -> Complex64 {
    // the full kernel is even, so the e^{+j} product form applies unchanged
    let full = coeffs.eval_all(g1)[i1] * coeffs.eval_all(g2)[i2];
    let mut acc = Complex64::new(full, 0.0);
    for &k in omega {
        let w = coeffs.get(k.k1) * coeffs.get(k.k2);
        if w != 0.0 {
            acc -= w * deriv_weight(k, i1, i2) * exp_neg(Frequency2D::new(g1, g2), k);
        }
    }
    acc
}

struct KernelTable {
    // K^{(a,b)}(f_l - f_j) for the derivative orders used by E
    vals: HashMap<(usize, usize), Mat<Complex64>>,
}

impl KernelTable {
    fn new(freqs: &[Frequency2D], coeffs: &KernelCoeffs, omega: &[Index2]) -> Self {
        let r = freqs.len();
        let orders = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        let mut vals: HashMap<_, _> = orders.iter().map(|&o| (o, Mat::<Complex64>::zeros(r, r))).collect();
        for l in 0..r {
            for j in 0..r {
                let g1 = freqs[l].f1 - freqs[j].f1;
                let g2 = freqs[l].f2 - freqs[j].f2;
                let e1 = coeffs.eval_all(g1);
                let e2 = coeffs.eval_all(g2);
                for &(a, b) in &orders {
                    let mut v = Complex64::new(e1[a] * e2[b], 0.0);
                    for &k in omega {
                        let w = coeffs.get(k.k1) * coeffs.get(k.k2);
                        if w != 0.0 {
                            v -= w * deriv_weight(k, a, b) * exp_neg(Frequency2D::new(g1, g2), k);
                        }
                    }
                    vals.get_mut(&(a, b)).unwrap()[(l, j)] = v;
                }
            }
        }
        KernelTable { vals }
    }

    fn get(&self, a: usize, b: usize) -> &Mat<Complex64> {
        &self.vals[&(a, b)]
    }
}

/// `E = sum_{k not in omega} c_{k1} c_{k2} b(k) b(k)^*`, assembled from kernel
/// derivatives. Without `omega` this is the full-index-set matrix `E-bar`.
pub fn build_e(freqs: &[Frequency2D], coeffs: &KernelCoeffs, kappa: f64, omega: Option<&[Index2]>) -> Mat<Complex64> {
    let r = freqs.len();
    let t = KernelTable::new(freqs, coeffs, omega.unwrap_or(&[]));
    let k = kappa;
    let blocks: [[(f64, (usize, usize)); 3]; 3] = [
        [(1.0, (0, 0)), (-k, (1, 0)), (-k, (0, 1))],
        [(k, (1, 0)), (-k * k, (2, 0)), (-k * k, (1, 1))],
        [(k, (0, 1)), (-k * k, (1, 1)), (-k * k, (0, 2))],
    ];
    let mut e = Mat::<Complex64>::zeros(3 * r, 3 * r);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, &(scale, (a, b))) in row.iter().enumerate() {
            let m = t.get(a, b);
            for l in 0..r {
                for j in 0..r {
                    e[(bi * r + l, bj * r + j)] = scale * m[(l, j)];
                }
            }
        }
    }
    e
}

/// `R(f) = weight * sum_l r_l e^{-j 2 pi f.k_l}`.
pub fn build_r_weighted(omega: &[Index2], rsign: &[Complex64], n: usize, weight: f64) -> Result<TrigPoly2D> {
    if omega.len() != rsign.len() {
        return Err(Error::DimensionMismatch(omega.len(), rsign.len()));
    }
    let mut p = TrigPoly2D::zeros(n, Polarity::Negative)?;
    let m = p.m();
    for (&k, &r) in omega.iter().zip(rsign) {
        if (r.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("sign {r} is not unit modulus")));
        }
        if k.k1.abs() > m || k.k2.abs() > m {
            return Err(Error::InvalidInput(format!("spike index {k:?} outside the grid")));
        }
        p.set_coeff(k, weight * r);
    }
    Ok(p)
}

/// `R` with the theorem weight `1 / n`.
pub fn build_r(omega: &[Index2], rsign: &[Complex64], n: usize) -> Result<TrigPoly2D> {
    build_r_weighted(omega, rsign, n, 1.0 / n as f64)
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub freqs: Vec<Frequency2D>,
    pub omega: Vec<Index2>,
    pub signs: SignPattern,
    pub lambda: f64,
    pub kappa: f64,
    pub alpha: Vec<Complex64>,
    pub beta1: Vec<Complex64>,
    pub beta2: Vec<Complex64>,
    pub system: InterpolationSystem,
    /// `lambda_min(E) / lambda_max(E)`.
    pub rcond: f64,
    kernel: KernelCoeffs,
    r_poly: TrigPoly2D,
    q: TrigPoly2D,
}

impl Certificate {
    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn m(&self) -> usize {
        self.kernel.m()
    }

    pub fn kernel(&self) -> &KernelCoeffs {
        &self.kernel
    }

    /// The coefficients `C_k` as a polynomial.
    pub fn poly(&self) -> &TrigPoly2D {
        &self.q
    }

    pub fn r_poly(&self) -> &TrigPoly2D {
        &self.r_poly
    }

    /// Raw solution `v` of the interpolation system.
    pub fn solution(&self) -> Vec<Complex64> {
        let k = self.kappa;
        let mut v = self.alpha.clone();
        v.extend(self.beta1.iter().map(|b| -b / k));
        v.extend(self.beta2.iter().map(|b| -b / k));
        v
    }
}

/// Solves the interpolation system and assembles `C`. The deterministic
/// certificate is the case of an empty `omega`.
pub fn solve_certificate(
    freqs: &[Frequency2D],
    omega: &[Index2],
    signs: &SignPattern,
    coeffs: &KernelCoeffs,
    kappa: f64,
    lambda: f64,
) -> Result<Certificate> {
    let r = freqs.len();
    if r == 0 {
        return Err(Error::InvalidInput("certificate needs at least one atom".into()));
    }
    if signs.h.len() != r {
        return Err(Error::DimensionMismatch(signs.h.len(), r));
    }
    let n = 2 * coeffs.m() + 1;
    let r_poly = build_r_weighted(omega, &signs.rsign, n, lambda)?;

    let e = build_e(freqs, coeffs, kappa, Some(omega));
    let mut rhs = vec![Complex64::new(0.0, 0.0); 3 * r];
    rhs[..r].copy_from_slice(&signs.h);
    for (&k, &rl) in omega.iter().zip(&signs.rsign) {
        for (slot, bk) in rhs.iter_mut().zip(build_b(k, freqs, kappa)) {
            *slot -= lambda * rl * bk;
        }
    }

    let (vals, u) = hermitian_eigen(&e)?;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond >= MIN_RCOND) {
        return Err(Error::ConstructionFailed { rcond });
    }
    let dim = 3 * r;
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    for (j, &s) in vals.iter().enumerate() {
        let proj: Complex64 = (0..dim).map(|i| u[(i, j)].conj() * rhs[i]).sum();
        for i in 0..dim {
            v[i] += u[(i, j)] * proj / s;
        }
    }

    let mut q = r_poly.clone();
    let on_omega: std::collections::HashSet<Index2> = omega.iter().copied().collect();
    for i in 0..n * n {
        let k = grid_index(n, i);
        if on_omega.contains(&k) {
            continue;
        }
        let w = coeffs.get(k.k1) * coeffs.get(k.k2);
        if w == 0.0 {
            continue;
        }
        let b = build_b(k, freqs, kappa);
        let bv: Complex64 = b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum();
        q.set_coeff(k, w * bv);
    }

    Ok(Certificate {
        freqs: freqs.to_vec(),
        omega: omega.to_vec(),
        signs: signs.clone(),
        lambda,
        kappa,
        alpha: v[..r].to_vec(),
        beta1: v[r..2 * r].iter().map(|x| -kappa * x).collect(),
        beta2: v[2 * r..].iter().map(|x| -kappa * x).collect(),
        system: InterpolationSystem { e, rhs },
        rcond,
        kernel: coeffs.clone(),
        r_poly,
        q,
    })
}

/// Coefficient-form evaluation of `Q^{(i1, i2)}(f)`.
pub fn eval_q(cert: &Certificate, f: Frequency2D, i1: usize, i2: usize) -> Complex64 {
    cert.q.eval(f, i1, i2)
}

/// Kernel-combination evaluation of `Q^{(i1, i2)}(f)` for `i1, i2 <= 2`.
pub fn eval_q_kernel_form(cert: &Certificate, f: Frequency2D, i1: usize, i2: usize) -> Result<Complex64> {
    if i1 > 2 || i2 > 2 {
        return Err(Error::UnsupportedOrder(i1.max(i2)));
    }
    let mut acc = cert.r_poly.eval(f, i1, i2);
    for (i, fi) in cert.freqs.iter().enumerate() {
        let (g1, g2) = (f.f1 - fi.f1, f.f2 - fi.f2);
        let k = |a, b| restricted_kernel(&cert.kernel, &cert.omega, g1, g2, a, b);
        acc += cert.alpha[i] * k(i1, i2) + cert.beta1[i] * k(i1 + 1, i2) + cert.beta2[i] * k(i1, i2 + 1);
    }
    Ok(acc)
}

/// `w^{i1 i2}(f)` such that `kappa^{i1+i2} Q_aux^{(i1, i2)}(f) = w^T v`,
/// assembled from kernel derivatives (`i1 + i2 <= 2`).
pub fn w_vector(
    freqs: &[Frequency2D],
    coeffs: &KernelCoeffs,
    kappa: f64,
    omega: &[Index2],
    f: Frequency2D,
    i1: usize,
    i2: usize,
) -> Result<Vec<Complex64>> {
    if i1 + i2 > 2 {
        return Err(Error::UnsupportedOrder(i1 + i2));
    }
    let r = freqs.len();
    let p = (i1 + i2) as i32;
    let mut w = vec![Complex64::new(0.0, 0.0); 3 * r];
    for (i, fi) in freqs.iter().enumerate() {
        let (g1, g2) = (f.f1 - fi.f1, f.f2 - fi.f2);
        let k = |a, b| restricted_kernel(coeffs, omega, g1, g2, a, b);
        w[i] = kappa.powi(p) * k(i1, i2);
        w[r + i] = -kappa.powi(p + 1) * k(i1 + 1, i2);
        w[2 * r + i] = -kappa.powi(p + 1) * k(i1, i2 + 1);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kappa as kappa_of, triple_kernel_coeffs};
    use crate::linalg::frobenius;
    use crate::signal::sample_frequencies;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_omega(n: usize, s: usize, rng: &mut ChaCha8Rng) -> Vec<Index2> {
        let mut pos = rand::seq::index::sample(rng, n * n, s).into_vec();
        pos.sort_unstable();
        pos.into_iter().map(|i| grid_index(n, i)).collect()
    }

    #[test]
    fn b_examples() {
        let freqs = [Frequency2D::new(0.1, 0.7), Frequency2D::new(0.45, 0.2)];
        let b = build_b(Index2::new(0, 0), &freqs, 0.3);
        assert!(b[..2].iter().all(|v| *v == c(1.0, 0.0)));
        assert!(b[2..].iter().all(|v| *v == c(0.0, 0.0)));

        let kappa = 0.1;
        let b = build_b(Index2::new(1, 1), &freqs, kappa);
        let e: Vec<Complex64> = freqs
            .iter()
            .map(|f| {
                let ph = -TAU * (f.f1 + f.f2);
                c(ph.cos(), ph.sin())
            })
            .collect();
        let w = c(0.0, -TAU * kappa);
        let want = [e[0], e[1], w * e[0], w * e[1], w * e[0], w * e[1]];
        for (g, x) in b.iter().zip(want) {
            assert!((g - x).norm() < 1e-15);
        }
    }

    #[test]
    fn single_atom_full_e_is_identity() {
        let coeffs = triple_kernel_coeffs(30).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let e = build_e(&[Frequency2D::new(0.3, 0.6)], &coeffs, kappa, None);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[(i, j)] - c(want, 0.0)).norm() < 1e-12, "({i},{j}) = {}", e[(i, j)]);
            }
        }
    }

    fn rank_one_sum(freqs: &[Frequency2D], coeffs: &KernelCoeffs, kappa: f64, omega: &[Index2]) -> Mat<Complex64> {
        let n = 2 * coeffs.m() + 1;
        let dim = 3 * freqs.len();
        let mut e = Mat::<Complex64>::zeros(dim, dim);
        for i in 0..n * n {
            let k = grid_index(n, i);
            if omega.contains(&k) {
                continue;
            }
            let w = coeffs.get(k.k1) * coeffs.get(k.k2);
            let b = build_b(k, freqs, kappa);
            for a in 0..dim {
                for d in 0..dim {
                    e[(a, d)] += w * b[a] * b[d].conj();
                }
            }
        }
        e
    }

    #[test]
    fn e_matches_rank_one_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (m, r) in [(10usize, 1usize), (20, 2), (30, 3)] {
            let coeffs = triple_kernel_coeffs(m).unwrap();
            let kappa = kappa_of(&coeffs).unwrap();
            let freqs = sample_frequencies(r, 0.0, &mut rng).unwrap();
            let full = build_e(&freqs, &coeffs, kappa, None);
            assert!(frobenius(&(&full - &rank_one_sum(&freqs, &coeffs, kappa, &[]))) < 1e-8);
            let omega = random_omega(2 * m + 1, 10, &mut rng);
            let restricted = build_e(&freqs, &coeffs, kappa, Some(&omega));
            assert!(frobenius(&(&restricted - &rank_one_sum(&freqs, &coeffs, kappa, &omega))) < 1e-8);
        }
    }

    #[test]
    fn r_examples() {
        assert!(build_r(&[], &[], 9).unwrap().coeffs().iter().all(|v| *v == c(0.0, 0.0)));
        let r = build_r(&[Index2::new(0, 0)], &[c(1.0, 0.0)], 9).unwrap();
        for &(a, b) in &[(0.0, 0.0), (0.3, 0.8), (0.77, 0.01)] {
            assert!((r.eval_at(a, b, 0, 0) - c(1.0 / 9.0, 0.0)).norm() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let omega = random_omega(9, 5, &mut rng);
        let signs = SignPattern::random(0, 5, &mut rng).rsign;
        let r = build_r(&omega, &signs, 9).unwrap();
        for _ in 0..100 {
            let (f1, f2): (f64, f64) = (rng.gen(), rng.gen());
            let mut want = c(0.0, 0.0);
            for (k, s) in omega.iter().zip(&signs) {
                let ph = -TAU * (f1 * k.k1 as f64 + f2 * k.k2 as f64);
                want += s * c(ph.cos(), ph.sin()) / 9.0;
            }
            assert!((r.eval_at(f1, f2, 0, 0) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn single_atom_at_origin_gives_the_kernel() {
        let coeffs = triple_kernel_coeffs(20).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let signs = SignPattern::new(vec![c(1.0, 0.0)], vec![]).unwrap();
        let cert = solve_certificate(&[Frequency2D::new(0.0, 0.0)], &[], &signs, &coeffs, kappa, 1.0 / 41.0).unwrap();
        assert!((cert.alpha[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(cert.beta1[0].norm() < 1e-12 && cert.beta2[0].norm() < 1e-12);
        for &(a, b) in &[(0.01, 0.0), (0.2, 0.7), (0.5, 0.5)] {
            let want = coeffs.eval_all(a)[0] * coeffs.eval_all(b)[0];
            assert!((eval_q(&cert, Frequency2D::new(a, b), 0, 0) - c(want, 0.0)).norm() < 1e-12);
        }
    }

    fn deterministic(m: usize, r: usize, sep: f64, seed: u64) -> Certificate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = triple_kernel_coeffs(m).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let freqs = sample_frequencies(r, sep, &mut rng).unwrap();
        let signs = SignPattern::random(r, 0, &mut rng);
        solve_certificate(&freqs, &[], &signs, &coeffs, kappa, 1.0 / (2 * m + 1) as f64).unwrap()
    }

    #[test]
    fn deterministic_certificate_interpolates() {
        let cert = deterministic(30, 3, 3.36 / 60.0, 33);
        for (f, h) in cert.freqs.iter().zip(&cert.signs.h) {
            assert!((eval_q(&cert, *f, 0, 0) - h).norm() < 1e-10);
            assert!(eval_q(&cert, *f, 1, 0).norm() < 1e-8);
            assert!(eval_q(&cert, *f, 0, 1).norm() < 1e-8);
        }
    }

    #[test]
    fn random_certificate_interpolates_and_saturates() {
        let m = 30;
        let n = 2 * m + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let coeffs = triple_kernel_coeffs(m).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let freqs = sample_frequencies(2, 3.36 / (n - 1) as f64, &mut rng).unwrap();
        let omega = random_omega(n, 5, &mut rng);
        let signs = SignPattern::random(2, 5, &mut rng);
        let lambda = 1.0 / n as f64;
        let cert = solve_certificate(&freqs, &omega, &signs, &coeffs, kappa, lambda).unwrap();
        for (k, r) in omega.iter().zip(&signs.rsign) {
            assert_eq!(cert.poly().coeff(*k) / lambda, *r);
        }
        for (f, h) in freqs.iter().zip(&signs.h) {
            assert!((eval_q(&cert, *f, 0, 0) - h).norm() < 1e-10);
            assert!(eval_q(&cert, *f, 1, 0).norm() < 1e-8);
            assert!(eval_q(&cert, *f, 0, 1).norm() < 1e-8);
        }
    }

    #[test]
    fn kernel_form_matches_coefficient_form() {
        let m = 20;
        let n = 2 * m + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let coeffs = triple_kernel_coeffs(m).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let freqs = sample_frequencies(3, 3.36 / (n - 1) as f64, &mut rng).unwrap();
        for omega in [vec![], random_omega(n, 6, &mut rng)] {
            let signs = SignPattern::random(3, omega.len(), &mut rng);
            let cert = solve_certificate(&freqs, &omega, &signs, &coeffs, kappa, 1.0 / n as f64).unwrap();
            for _ in 0..100 {
                let f = Frequency2D::new(rng.gen(), rng.gen());
                for (i1, i2) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                    let a = eval_q(&cert, f, i1, i2);
                    let b = eval_q_kernel_form(&cert, f, i1, i2).unwrap();
                    let scale = (TAU * m as f64).powi((i1 + i2) as i32);
                    assert!((a - b).norm() < 1e-9 * scale, "{f:?} ({i1},{i2}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn w_vectors_match_their_expansion() {
        let m = 15;
        let n = 2 * m + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let coeffs = triple_kernel_coeffs(m).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let freqs = sample_frequencies(2, 0.1, &mut rng).unwrap();
        let omega = random_omega(n, 7, &mut rng);
        for _ in 0..20 {
            let f = Frequency2D::new(rng.gen(), rng.gen());
            for (i1, i2) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                let w = w_vector(&freqs, &coeffs, kappa, &omega, f, i1, i2).unwrap();
                let mut want = vec![c(0.0, 0.0); w.len()];
                for i in 0..n * n {
                    let k = grid_index(n, i);
                    if omega.contains(&k) {
                        continue;
                    }
                    let scale = Complex64::new(0.0, -TAU * kappa).powu((i1 + i2) as u32)
                        * (k.k1 as f64).powi(i1 as i32)
                        * (k.k2 as f64).powi(i2 as i32)
                        * coeffs.get(k.k1)
                        * coeffs.get(k.k2)
                        * exp_neg(f, k);
                    for (slot, b) in want.iter_mut().zip(build_b(k, &freqs, kappa)) {
                        *slot += scale * b.conj();
                    }
                }
                for (a, b) in w.iter().zip(&want) {
                    assert!((a - b).norm() < 1e-10, "({i1},{i2})");
                }
                let l2 = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let l1 = w.iter().map(|x| x.norm()).sum::<f64>();
                assert!(l2 <= l1 + 1e-15);
            }
        }
    }

    #[test]
    fn global_phase_rotates_q() {
        let cert = deterministic(20, 3, 3.36 / 40.0, 37);
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated_signs = SignPattern::new(cert.signs.h.iter().map(|h| h * phase).collect(), vec![]).unwrap();
        let rotated =
            solve_certificate(&cert.freqs, &[], &rotated_signs, &cert.kernel, cert.kappa, cert.lambda).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..50 {
            let f = Frequency2D::new(rng.gen(), rng.gen());
            assert!((eval_q(&rotated, f, 0, 0) - phase * eval_q(&cert, f, 0, 0)).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let coeffs = triple_kernel_coeffs(20).unwrap();
        let kappa = kappa_of(&coeffs).unwrap();
        let f = Frequency2D::new(0.2, 0.2);
        let twin = f.offset(1e-12, 0.0);
        let signs = SignPattern::random(2, 0, &mut ChaCha8Rng::seed_from_u64(39));
        assert!(matches!(
            solve_certificate(&[f, twin], &[], &signs, &coeffs, kappa, 0.02),
            Err(Error::ConstructionFailed { .. })
        ));
    }
}
