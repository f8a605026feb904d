//! Experiment harness: single trials, phase-transition sweeps and their
//! on-disk artifacts.

mod artifacts;
mod config;
mod phase;
mod trial;

pub use artifacts::{
    decode_csv, decode_pgm, emit_artifacts, encode_csv, encode_pgm, gray_level, CellTiming, Manifest, Timings, CSV_FILE,
    MANIFEST_FILE, PGM_FILE, TIMINGS_FILE, TRIALS_FILE,
};
pub use config::{ExperimentConfig, IntRange, LambdaRule, LambdaSpec, SeparationRule, SeparationSpec, MAX_AXIS};
pub use phase::{run_phase_transition, CellSummary, PhaseOutcome, SuccessTable};
pub use trial::{run_single_trial, score_nmse, trial_rng, trial_stream, Estimate, TrialRecord, TrialStatus};
