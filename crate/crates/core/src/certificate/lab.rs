use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{solve_certificate, validate_certificate, SignPattern, ValidationOptions, ValidationReport};
use crate::error::Result;
use crate::kernels::{kappa, triple_kernel_coeffs};
use crate::signal::{sample_frequencies, sample_spikes, Frequency2D, Index2, SpikeMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub m: usize,
    pub r: usize,
    /// Spike count; 0 gives the deterministic certificate.
    pub s: usize,
    /// Minimum separation; `None` means `3.36 / (2m)`.
    pub separation: Option<f64>,
    /// `None` means `1 / n`.
    pub lambda: Option<f64>,
    /// Sign patterns drawn on the same supports.
    pub patterns: usize,
    pub seed: u64,
    pub validation: ValidationOptions,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            m: 50,
            r: 3,
            s: 0,
            separation: None,
            lambda: None,
            patterns: 1,
            seed: 0,
            validation: ValidationOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabTrial {
    pub pattern: usize,
    pub rcond: f64,
    pub report: ValidationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub m: usize,
    pub separation: f64,
    pub lambda: f64,
    pub freqs: Vec<Frequency2D>,
    pub omega: Vec<Index2>,
    pub trials: Vec<LabTrial>,
    pub pass: bool,
}

/// Draws supports once, then builds and validates one certificate per random
/// sign pattern.
pub fn certificate_lab(cfg: &LabConfig) -> Result<LabReport> {
    let m = cfg.m;
    let n = 2 * m + 1;
    let separation = cfg.separation.unwrap_or(3.36 / (2 * m) as f64);
    let lambda = cfg.lambda.unwrap_or(1.0 / n as f64);
    let coeffs = triple_kernel_coeffs(m)?;
    let k = kappa(&coeffs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let freqs = sample_frequencies(cfg.r, separation, &mut rng)?;
    let omega = sample_spikes(cfg.s, n, SpikeMode::ExactS, &mut rng)?.support().to_vec();
    let mut trials = Vec::with_capacity(cfg.patterns);
    for pattern in 0..cfg.patterns {
        let signs = SignPattern::random(cfg.r, cfg.s, &mut rng);
        let cert = solve_certificate(&freqs, &omega, &signs, &coeffs, k, lambda)?;
        let report = validate_certificate(&cert, &cfg.validation)?;
        trials.push(LabTrial {
            pattern,
            rcond: cert.rcond,
            report,
        });
    }
    Ok(LabReport {
        m,
        separation,
        lambda,
        pass: trials.iter().all(|t| t.report.pass),
        freqs,
        omega,
        trials,
    })
}
