use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::RecoveryOptions;
use crate::sdp::SolverOptions;
use crate::signal::{half_width, SpikeMode};

/// Regularization weight: a number, or `"theorem"` for `1 / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Named(LambdaRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaRule {
    Theorem,
}

impl LambdaSpec {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            LambdaSpec::Value(v) => v,
            LambdaSpec::Named(LambdaRule::Theorem) => 1.0 / n as f64,
        }
    }
}

/// Minimum separation: a number, `"fig2"` for `3 / (n - 1)` or `"theorem"`
/// for `3.36 / (n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeparationSpec {
    Value(f64),
    Named(SeparationRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparationRule {
    Fig2,
    Theorem,
}

impl SeparationSpec {
    pub fn resolve(self, n: usize) -> f64 {
        let w = (n.max(2) - 1) as f64;
        match self {
            SeparationSpec::Value(v) => v,
            SeparationSpec::Named(SeparationRule::Fig2) => 3.0 / w,
            SeparationSpec::Named(SeparationRule::Theorem) => 3.36 / w,
        }
    }
}

/// Inclusive integer range written as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange(pub usize, pub usize);

impl IntRange {
    pub fn values(self) -> impl Iterator<Item = usize> {
        self.0..=self.1
    }

    pub fn len(self) -> usize {
        (self.1 + 1).saturating_sub(self.0)
    }

    pub fn is_empty(self) -> bool {
        self.1 < self.0
    }
}

/// Axis values above this would collide in the per-trial stream id.
pub const MAX_AXIS: usize = (1 << 20) - 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub r_range: IntRange,
    pub s_range: IntRange,
    pub lambda: LambdaSpec,
    pub trials: usize,
    pub delta_min: SeparationSpec,
    pub seed: u64,
    pub spike_mode: SpikeMode,
    /// Runs whose fraction of non-converged solves exceeds this are flagged.
    pub max_nonconverged_fraction: f64,
    pub solver: SolverOptions,
    pub recovery: RecoveryOptions,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 9,
            r_range: IntRange(1, 5),
            s_range: IntRange(1, 5),
            lambda: LambdaSpec::Named(LambdaRule::Theorem),
            trials: 10,
            delta_min: SeparationSpec::Named(SeparationRule::Fig2),
            seed: 2018,
            spike_mode: SpikeMode::ExactS,
            max_nonconverged_fraction: 0.1,
            solver: SolverOptions::default(),
            recovery: RecoveryOptions::default(),
            output: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn lambda_value(&self) -> f64 {
        self.lambda.resolve(self.n)
    }

    pub fn delta_value(&self) -> f64 {
        self.delta_min.resolve(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        half_width(self.n)?;
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.trials == 0 || self.trials > MAX_AXIS {
            return bad(format!("trials must be in 1..={MAX_AXIS}, got {}", self.trials));
        }
        for (name, r) in [("r_range", self.r_range), ("s_range", self.s_range)] {
            if r.is_empty() {
                return bad(format!("{name} [{}, {}] is empty", r.0, r.1));
            }
            if r.1 > MAX_AXIS {
                return bad(format!("{name} upper end {} exceeds {MAX_AXIS}", r.1));
            }
        }
        if self.r_range.1 + self.s_range.1 > self.n * self.n {
            return bad(format!(
                "r + s up to {} exceeds n^2 = {}",
                self.r_range.1 + self.s_range.1,
                self.n * self.n
            ));
        }
        let lambda = self.lambda_value();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {lambda}"));
        }
        let delta = self.delta_value();
        if !(delta >= 0.0 && delta <= 0.5) {
            return bad(format!("delta_min must lie in [0, 0.5], got {delta}"));
        }
        if !(0.0..=1.0).contains(&self.max_nonconverged_fraction) {
            return bad(format!(
                "max_nonconverged_fraction must lie in [0, 1], got {}",
                self.max_nonconverged_fraction
            ));
        }
        if self.recovery.points_per_axis < 4 * self.n {
            return bad(format!(
                "recovery grid {} is below 4n = {}",
                self.recovery.points_per_axis,
                4 * self.n
            ));
        }
        Ok(())
    }
}
