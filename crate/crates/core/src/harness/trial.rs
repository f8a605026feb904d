use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::recovery::{extract, SUCCESS_NMSE};
use crate::sdp::{solve_dual_sdp, Diagnostics, SdpProblem};
use crate::signal::{
    grid_position, half_width, observe, sample_sources, sample_spikes, synthesize, wrap_distance, AtomSet, Instance,
    SampleGrid, SpikePattern,
};

/// Stream id of one trial; every random draw of the trial comes from it.
pub fn trial_stream(r: usize, s: usize, trial: usize) -> u64 {
    ((r as u64) << 40) | ((s as u64) << 20) | trial as u64
}

pub fn trial_rng(seed: u64, r: usize, s: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_stream(r, s, trial));
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Solved,
    /// No source set with the requested separation was found.
    InfeasibleSeparation,
    /// The recovered supports gave a rank-deficient amplitude fit.
    DegenerateFit,
    /// Any other numerical failure; see the message.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub sources: AtomSet,
    pub spikes: SpikePattern,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub lambda: f64,
    pub delta_min: f64,
    pub r: usize,
    pub s: usize,
    pub trial: usize,
    pub seed: u64,
    pub stream: u64,
    pub status: TrialStatus,
    pub message: Option<String>,
    pub truth: Option<Instance>,
    pub estimate: Option<Estimate>,
    pub nmse: Option<f64>,
    /// Converged and `nmse <= 1e-3`.
    pub success: bool,
    pub converged: bool,
    /// Every true frequency has an estimate within one recovery-grid cell.
    pub sources_localized: bool,
    /// The estimated spike support equals the true one.
    pub support_exact: bool,
    pub objective: Option<f64>,
    pub diagnostics: Option<Diagnostics>,
    /// Kept out of the serialized record so reruns compare byte for byte.
    #[serde(skip)]
    pub wall_secs: f64,
}

/// `||X - X_hat|| / ||X||` outside the detected spikes. A spike-only instance
/// has `X = 0`, so the error is then normalized by `||Y||` instead.
pub fn score_nmse(x: &SampleGrid, y: &SampleGrid, est: &Estimate) -> Result<f64> {
    let n = x.n();
    let x_hat = synthesize(&est.sources, n)?;
    let mut keep = vec![true; n * n];
    for &k in est.spikes.support() {
        keep[grid_position(n, k)] = false;
    }
    let masked = |g: &SampleGrid, h: Option<&SampleGrid>| -> f64 {
        g.as_slice()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep[*i])
            .map(|(i, v)| (v - h.map_or(num_complex::Complex64::new(0.0, 0.0), |h| h.as_slice()[i])).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let den = masked(x, None);
    if den > 0.0 {
        return Ok(masked(x, Some(&x_hat)) / den);
    }
    let err = masked(&x_hat, None);
    let scale = y.norm();
    Ok(if scale > 0.0 { err / scale } else { err })
}

fn check_trial(config: &ExperimentConfig, r: usize, s: usize) -> Result<()> {
    half_width(config.n)?;
    let cap = config.n * config.n;
    if r + s > cap {
        return Err(Error::InvalidInput(format!("r + s = {} exceeds n^2 = {cap}", r + s)));
    }
    let lambda = config.lambda_value();
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Sample, solve, recover and score one instance. Numerical failures after
/// the inputs are checked are recorded in the returned record.
pub fn run_single_trial(config: &ExperimentConfig, r: usize, s: usize, trial: usize) -> Result<TrialRecord> {
    check_trial(config, r, s)?;
    let start = Instant::now();
    let n = config.n;
    let mut record = TrialRecord {
        n,
        lambda: config.lambda_value(),
        delta_min: config.delta_value(),
        r,
        s,
        trial,
        seed: config.seed,
        stream: trial_stream(r, s, trial),
        status: TrialStatus::Solved,
        message: None,
        truth: None,
        estimate: None,
        nmse: None,
        success: false,
        converged: false,
        sources_localized: false,
        support_exact: false,
        objective: None,
        diagnostics: None,
        wall_secs: 0.0,
    };
    let outcome = solve_trial(config, &mut record);
    if let Err(err) = outcome {
        record.status = match err {
            Error::InfeasibleSeparation { .. } => TrialStatus::InfeasibleSeparation,
            Error::DegenerateFit(_) => TrialStatus::DegenerateFit,
            _ => TrialStatus::Failed,
        };
        record.message = Some(err.to_string());
        record.success = false;
    }
    record.wall_secs = start.elapsed().as_secs_f64();
    Ok(record)
}

fn solve_trial(config: &ExperimentConfig, rec: &mut TrialRecord) -> Result<()> {
    let n = config.n;
    let mut rng = trial_rng(config.seed, rec.r, rec.s, rec.trial);
    let atoms = sample_sources(rec.r, rec.delta_min, &mut rng)?;
    let spikes = sample_spikes(rec.s, n, config.spike_mode, &mut rng)?;
    let x = synthesize(&atoms, n)?;
    let y = observe(&x, &spikes)?;
    rec.truth = Some(Instance {
        n,
        atoms: atoms.clone(),
        spikes: spikes.clone(),
    });

    let problem = SdpProblem::new(y.clone(), rec.lambda)?;
    let sol = solve_dual_sdp(&problem, &config.solver)?;
    rec.converged = sol.diagnostics.converged;
    rec.objective = Some(sol.objective);
    rec.diagnostics = Some(sol.diagnostics.clone());

    let (sources, est_spikes) = extract(&y, &sol.c, rec.lambda, &config.recovery)?;
    let cell = 1.0 / config.recovery.points_per_axis as f64;
    let found = sources.frequencies();
    rec.sources_localized = atoms
        .frequencies()
        .iter()
        .all(|f| found.iter().any(|g| wrap_distance(*f, *g) <= cell));
    rec.support_exact = est_spikes.support() == spikes.support();
    let est = Estimate {
        sources,
        spikes: est_spikes,
    };
    let nmse = score_nmse(&x, &y, &est)?;
    rec.nmse = Some(nmse);
    rec.success = rec.converged && nmse <= SUCCESS_NMSE;
    rec.estimate = Some(est);
    Ok(())
}
