use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, hermitian_eigen, hermitian_eigenvalues, reconstruct};

/// Symmetry tolerance relative to `max(1, max |h_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;

fn check_hermitian(h: &Mat<Complex64>) -> Result<()> {
    let mut scale = 1.0f64;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            scale = scale.max(h[(i, j)].norm());
        }
    }
    let asym = asymmetry(h);
    if h.nrows() != h.ncols() || asym > SYMMETRY_TOL * scale {
        return Err(Error::NotHermitian(asym));
    }
    Ok(())
}

/// Nearest positive semidefinite matrix in Frobenius norm (negative
/// eigenvalues clipped to zero).
pub fn psd_project(h: &Mat<Complex64>) -> Result<Mat<Complex64>> {
    check_hermitian(h)?;
    let (vals, u) = hermitian_eigen(h)?;
    let pos: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > 0.0).collect();
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    Ok(reconstruct(&u, &clipped, &pos))
}

pub fn min_eigenvalue(h: &Mat<Complex64>) -> Result<f64> {
    check_hermitian(h)?;
    Ok(hermitian_eigenvalues(h)?.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Mat<Complex64> {
        let mut a = Mat::<Complex64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = if i == j {
                    c(rng.gen::<f64>() - 0.5, 0.0)
                } else {
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                };
                a[(i, j)] = v;
                a[(j, i)] = v.conj();
            }
        }
        a
    }

    #[test]
    fn psd_input_is_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_hermitian(12, &mut rng);
        let p = &g * g.adjoint();
        let out = psd_project(&p).unwrap();
        assert!(frobenius(&(&out - &p)) < 1e-12);
    }

    #[test]
    fn negative_eigenvalue_is_clipped() {
        let mut d = Mat::<Complex64>::zeros(2, 2);
        d[(0, 0)] = c(1.0, 0.0);
        d[(1, 1)] = c(-2.0, 0.0);
        let out = psd_project(&d).unwrap();
        let want = [[1.0, 0.0], [0.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((out[(i, j)] - c(want[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    /// Independent route: Jacobi rotations on the real 2n x 2n embedding.
    fn jacobi_clip(h: &Mat<Complex64>) -> Vec<Vec<f64>> {
        let n = h.nrows();
        let m = 2 * n;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..n {
            for j in 0..n {
                let v = h[(i, j)];
                a[i][j] = v.re;
                a[i + n][j + n] = v.re;
                a[i][j + n] = -v.im;
                a[i + n][j] = v.im;
            }
        }
        let mut vecs = vec![vec![0.0; m]; m];
        for (i, row) in vecs.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..m {
                for q in (p + 1)..m {
                    off += a[p][q] * a[p][q];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..m {
                for q in (p + 1)..m {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let (cs, sn) = (1.0 / (t * t + 1.0).sqrt(), t / (t * t + 1.0).sqrt());
                    for k in 0..m {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = cs * akp - sn * akq;
                        a[k][q] = sn * akp + cs * akq;
                    }
                    for k in 0..m {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = cs * apk - sn * aqk;
                        a[q][k] = sn * apk + cs * aqk;
                    }
                    for row in vecs.iter_mut() {
                        let (vp, vq) = (row[p], row[q]);
                        row[p] = cs * vp - sn * vq;
                        row[q] = sn * vp + cs * vq;
                    }
                }
            }
        }
        let mut out = vec![vec![0.0; m]; m];
        for k in 0..m {
            let w = a[k][k].max(0.0);
            for i in 0..m {
                for j in 0..m {
                    out[i][j] += w * vecs[i][k] * vecs[j][k];
                }
            }
        }
        out
    }

    #[test]
    fn matches_independent_eigen_clipping() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(20, &mut rng);
        let out = psd_project(&h).unwrap();
        let oracle = jacobi_clip(&h);
        for i in 0..20 {
            for j in 0..20 {
                assert!((out[(i, j)].re - oracle[i][j]).abs() < 1e-10);
                assert!((out[(i, j)].im - oracle[i + 20][j]).abs() < 1e-10);
            }
        }
        // nearest: no other PSD candidate from the sampled family is closer
        let base = frobenius(&(&out - &h));
        for _ in 0..20 {
            let g = random_hermitian(20, &mut rng);
            let gg = &g * g.adjoint();
            let cand = Mat::from_fn(20, 20, |i, j| out[(i, j)] + gg[(i, j)] * 1e-3);
            assert!(frobenius(&(&cand - &h)) >= base - 1e-12);
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut a = Mat::<Complex64>::zeros(2, 2);
        a[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(psd_project(&a), Err(Error::NotHermitian(_))));
    }
}
