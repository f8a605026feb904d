use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::trial::{run_single_trial, TrialRecord};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub r: usize,
    pub s: usize,
    pub trials: usize,
    pub successes: usize,
    pub nonconverged: usize,
    pub rate: f64,
    #[serde(skip)]
    pub wall_secs: f64,
}

/// Success rates over the `(r, s)` grid, cells ordered by `r` then `s`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuccessTable {
    pub r_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub cells: Vec<CellSummary>,
}

impl SuccessTable {
    pub fn from_records(r_values: Vec<usize>, s_values: Vec<usize>, records: &[TrialRecord]) -> Self {
        let mut cells = Vec::with_capacity(r_values.len() * s_values.len());
        for &r in &r_values {
            for &s in &s_values {
                let mine: Vec<&TrialRecord> = records.iter().filter(|t| t.r == r && t.s == s).collect();
                let successes = mine.iter().filter(|t| t.success).count();
                let nonconverged = mine.iter().filter(|t| t.diagnostics.is_some() && !t.converged).count();
                let trials = mine.len();
                cells.push(CellSummary {
                    r,
                    s,
                    trials,
                    successes,
                    nonconverged,
                    rate: if trials > 0 { successes as f64 / trials as f64 } else { 0.0 },
                    wall_secs: mine.iter().map(|t| t.wall_secs).sum(),
                });
            }
        }
        SuccessTable {
            r_values,
            s_values,
            cells,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rate(&self, r: usize, s: usize) -> Option<f64> {
        self.cells.iter().find(|c| c.r == r && c.s == s).map(|c| c.rate)
    }

    /// Places where the rate rises by more than `slack` when `r` or `s`
    /// grows by one step.
    pub fn monotonicity_violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        for &s in &self.s_values {
            for w in self.r_values.windows(2) {
                if let (Some(a), Some(b)) = (self.rate(w[0], s), self.rate(w[1], s)) {
                    if b > a + slack {
                        out.push(format!("s={s}: rate {b:.3} at r={} exceeds {a:.3} at r={}", w[1], w[0]));
                    }
                }
            }
        }
        for &r in &self.r_values {
            for w in self.s_values.windows(2) {
                if let (Some(a), Some(b)) = (self.rate(r, w[0]), self.rate(r, w[1])) {
                    if b > a + slack {
                        out.push(format!("r={r}: rate {b:.3} at s={} exceeds {a:.3} at s={}", w[1], w[0]));
                    }
                }
            }
        }
        out
    }

    /// Fraction of solved trials whose solver did not converge.
    pub fn nonconverged_fraction(&self) -> f64 {
        let total: usize = self.cells.iter().map(|c| c.trials).sum();
        let bad: usize = self.cells.iter().map(|c| c.nonconverged).sum();
        if total == 0 {
            0.0
        } else {
            bad as f64 / total as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct PhaseOutcome {
    pub table: SuccessTable,
    pub records: Vec<TrialRecord>,
    /// Soft monotonicity check with slack `2 / trials`; logged, not fatal.
    pub violations: Vec<String>,
}

/// Every trial of every cell, run in parallel; records come back in
/// `(r, s, trial)` order regardless of scheduling.
pub fn run_phase_transition(config: &ExperimentConfig) -> Result<PhaseOutcome> {
    config.validate()?;
    let tasks: Vec<(usize, usize, usize)> = config
        .r_range
        .values()
        .flat_map(|r| config.s_range.values().map(move |s| (r, s)))
        .flat_map(|(r, s)| (0..config.trials).map(move |t| (r, s, t)))
        .collect();
    let records = tasks
        .par_iter()
        .map(|&(r, s, t)| run_single_trial(config, r, s, t))
        .collect::<Result<Vec<_>>>()?;
    for rec in &records {
        if let Some(msg) = &rec.message {
            log::warn!("r={} s={} trial={}: {msg}", rec.r, rec.s, rec.trial);
        }
    }
    let table = SuccessTable::from_records(config.r_range.values().collect(), config.s_range.values().collect(), &records);
    let violations = table.monotonicity_violations(2.0 / config.trials as f64);
    for v in &violations {
        log::warn!("monotonicity: {v}");
    }
    Ok(PhaseOutcome {
        table,
        records,
        violations,
    })
}
