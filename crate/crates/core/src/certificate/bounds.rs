//! Numeric checks of the kernel constants and of the norm bounds on `b(k)`
//! and `E-bar` in the large-bandwidth regime.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_b, build_e};
use crate::error::Result;
use crate::kernels::{kappa, triple_kernel_coeffs};
use crate::linalg::hermitian_eigenvalues;
use crate::signal::{sample_frequencies, Index2};

pub const KAPPA_RANGE: (f64, f64) = (0.467, 0.468);
pub const C_INF_BOUND: f64 = 1.3;
pub const B_NORM_BOUND: f64 = 21.0;
pub const EBAR_BOUNDS: EbarNorms = EbarNorms {
    identity_gap: 0.24,
    norm: 1.24,
    inverse_norm: 1.32,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub m: usize,
    pub widths: [usize; 3],
    pub kappa: f64,
    /// `kappa * m`, expected in `[0.467, 0.468]`.
    pub kappa_scaled: f64,
    /// `max |c_k| * m`, expected at most 1.3.
    pub c_inf_scaled: f64,
    pub pass: bool,
}

pub fn kernel_constants(m: usize) -> Result<KernelConstants> {
    let c = triple_kernel_coeffs(m)?;
    let k = kappa(&c)?;
    let kappa_scaled = k * m as f64;
    let c_inf_scaled = c.max_abs() * m as f64;
    Ok(KernelConstants {
        m,
        widths: c.widths(),
        kappa: k,
        kappa_scaled,
        c_inf_scaled,
        pass: (KAPPA_RANGE.0..=KAPPA_RANGE.1).contains(&kappa_scaled) && c_inf_scaled <= C_INF_BOUND,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BNormReport {
    pub m: usize,
    pub r: usize,
    pub samples: usize,
    /// max over samples of `||b(k)||^2 / r`.
    pub max_scaled: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Draws `r` uniform atoms and `samples` uniform indices in `{-m..m}^2` and
/// compares `||b(k)||^2` against `21 r`.
pub fn b_norm_check<R: Rng + ?Sized>(m: usize, r: usize, samples: usize, rng: &mut R) -> Result<BNormReport> {
    let c = triple_kernel_coeffs(m)?;
    let k = kappa(&c)?;
    let freqs = sample_frequencies(r, 0.0, rng)?;
    let mi = m as i64;
    let mut max_scaled = 0.0f64;
    let mut violations = 0;
    for _ in 0..samples {
        let idx = Index2::new(rng.gen_range(-mi..=mi), rng.gen_range(-mi..=mi));
        let norm2: f64 = build_b(idx, &freqs, k).iter().map(|v| v.norm_sqr()).sum();
        max_scaled = max_scaled.max(norm2 / r as f64);
        if norm2 > B_NORM_BOUND * r as f64 {
            violations += 1;
        }
    }
    Ok(BNormReport {
        m,
        r,
        samples,
        max_scaled,
        violations,
        pass: violations == 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EbarNorms {
    /// `||I - E-bar||`
    pub identity_gap: f64,
    /// `||E-bar||`
    pub norm: f64,
    /// `||E-bar^{-1}||`
    pub inverse_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EbarReport {
    pub m: usize,
    pub r: usize,
    pub separation: f64,
    pub sets: Vec<EbarNorms>,
    pub worst: EbarNorms,
    pub pass: bool,
}

/// Spectral norms of `E-bar` for one atom set (the matrix is Hermitian).
pub fn ebar_norms(freqs: &[crate::signal::Frequency2D], m: usize) -> Result<EbarNorms> {
    let c = triple_kernel_coeffs(m)?;
    let k = kappa(&c)?;
    let vals = hermitian_eigenvalues(&build_e(freqs, &c, k, None))?;
    Ok(EbarNorms {
        identity_gap: vals.iter().map(|l| (1.0 - l).abs()).fold(0.0, f64::max),
        norm: vals.iter().map(|l| l.abs()).fold(0.0, f64::max),
        inverse_norm: 1.0 / vals.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min),
    })
}

pub fn ebar_check<R: Rng + ?Sized>(m: usize, r: usize, sets: usize, separation: f64, rng: &mut R) -> Result<EbarReport> {
    let mut all = Vec::with_capacity(sets);
    for _ in 0..sets {
        let freqs = sample_frequencies(r, separation, rng)?;
        all.push(ebar_norms(&freqs, m)?);
    }
    let worst = all.iter().fold(
        EbarNorms {
            identity_gap: 0.0,
            norm: 0.0,
            inverse_norm: 0.0,
        },
        |w, x| EbarNorms {
            identity_gap: w.identity_gap.max(x.identity_gap),
            norm: w.norm.max(x.norm),
            inverse_norm: w.inverse_norm.max(x.inverse_norm),
        },
    );
    let pass = worst.identity_gap <= EBAR_BOUNDS.identity_gap
        && worst.norm <= EBAR_BOUNDS.norm
        && worst.inverse_norm <= EBAR_BOUNDS.inverse_norm;
    Ok(EbarReport {
        m,
        r,
        separation,
        sets: all,
        worst,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsConfig {
    pub m: usize,
    /// Atoms and index samples for the `||b(k)||` check.
    pub b_atoms: usize,
    pub b_samples: usize,
    /// Atoms per set and set count for the `E-bar` check.
    pub e_atoms: usize,
    pub e_sets: usize,
    /// Separation of the `E-bar` atom sets; `None` means `1.68 / m`.
    pub separation: Option<f64>,
    pub seed: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            m: 2000,
            b_atoms: 10,
            b_samples: 1000,
            e_atoms: 5,
            e_sets: 20,
            separation: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub kernel: KernelConstants,
    pub b_norm: BNormReport,
    pub ebar: EbarReport,
    pub pass: bool,
}

/// All three large-bandwidth checks from one seed.
pub fn verify_bounds(cfg: &BoundsConfig) -> Result<BoundsReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let kernel = kernel_constants(cfg.m)?;
    let b_norm = b_norm_check(cfg.m, cfg.b_atoms, cfg.b_samples, &mut rng)?;
    let sep = cfg.separation.unwrap_or(1.68 / cfg.m as f64);
    let ebar = ebar_check(cfg.m, cfg.e_atoms, cfg.e_sets, sep, &mut rng)?;
    Ok(BoundsReport {
        pass: kernel.pass && b_norm.pass && ebar.pass,
        kernel,
        b_norm,
        ebar,
    })
}
