use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lse2d::certificate::bounds::{verify_bounds, BoundsConfig};
use lse2d::certificate::{certificate_lab, LabConfig, ValidationOptions};
use lse2d::harness::{
    emit_artifacts, run_phase_transition, run_single_trial, ExperimentConfig, IntRange, LambdaRule, LambdaSpec,
    SeparationRule, SeparationSpec,
};
use lse2d::signal::SpikeMode;
use lse2d::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lse2d", version, about = "Robust 2-D line spectral estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and print its record as JSON.
    Single {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Sweep the (r, s) grid and write the run artifacts.
    Phase {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Replace artifacts already present in the output directory.
        #[arg(long)]
        force: bool,
    },
    /// Build dual certificates on random supports and validate them.
    Certify {
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        s: usize,
        /// Minimum separation (default 3.36 / (2m)).
        #[arg(long)]
        separation: Option<f64>,
        /// Spike weight (default 1 / n).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1)]
        patterns: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1024)]
        grid_points: usize,
        /// Near-region radius (default 0.09 / m).
        #[arg(long)]
        near_radius: Option<f64>,
    },
    /// Check the kernel constants and the b(k) and E-bar norm bounds.
    VerifyBounds {
        #[arg(long, default_value_t = 2000)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        b_atoms: usize,
        #[arg(long, default_value_t = 1000)]
        b_samples: usize,
        #[arg(long, default_value_t = 5)]
        e_atoms: usize,
        #[arg(long, default_value_t = 20)]
        e_sets: usize,
        /// Separation of the E-bar atom sets (default 1.68 / m).
        #[arg(long)]
        separation: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Experiment flags; anything set in `--config` takes precedence.
#[derive(Args)]
struct ExperimentArgs {
    /// TOML file with ExperimentConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Inclusive range `lo:hi`, or a single value.
    #[arg(long, value_parser = parse_range)]
    r_range: Option<IntRange>,
    #[arg(long, value_parser = parse_range)]
    s_range: Option<IntRange>,
    /// A number or `theorem` (1 / n).
    #[arg(long, value_parser = parse_lambda)]
    lambda: Option<LambdaSpec>,
    #[arg(long)]
    trials: Option<usize>,
    /// A number, `fig2` (3 / (n - 1)) or `theorem` (3.36 / (n - 1)).
    #[arg(long, value_parser = parse_separation)]
    delta_min: Option<SeparationSpec>,
    #[arg(long)]
    seed: Option<u64>,
    /// `exact-s` or `bernoulli`.
    #[arg(long, value_parser = parse_spike_mode)]
    spike_mode: Option<SpikeMode>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    points_per_axis: Option<usize>,
    /// Exit with status 3 when more solves than this fraction fail to converge.
    #[arg(long)]
    max_nonconverged_fraction: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_range(text: &str) -> Result<IntRange, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match text.split_once(':') {
        Some((lo, hi)) => Ok(IntRange(parse(lo)?, parse(hi)?)),
        None => {
            let v = parse(text)?;
            Ok(IntRange(v, v))
        }
    }
}

fn parse_lambda(text: &str) -> Result<LambdaSpec, String> {
    match text {
        "theorem" => Ok(LambdaSpec::Named(LambdaRule::Theorem)),
        _ => text.parse().map(LambdaSpec::Value).map_err(|e| format!("{text:?}: {e}")),
    }
}

fn parse_separation(text: &str) -> Result<SeparationSpec, String> {
    match text {
        "fig2" => Ok(SeparationSpec::Named(SeparationRule::Fig2)),
        "theorem" => Ok(SeparationSpec::Named(SeparationRule::Theorem)),
        _ => text.parse().map(SeparationSpec::Value).map_err(|e| format!("{text:?}: {e}")),
    }
}

fn parse_spike_mode(text: &str) -> Result<SpikeMode, String> {
    match text {
        "exact-s" => Ok(SpikeMode::ExactS),
        "bernoulli" => Ok(SpikeMode::Bernoulli),
        _ => Err(format!("unknown spike mode {text:?}")),
    }
}

enum Failure {
    Config(String),
    Io(String),
    NonConverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::NonConverged(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::NonConverged(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::Io { .. } | Error::OutputExists(_) => Failure::Io(err.to_string()),
            _ => Failure::Config(err.to_string()),
        }
    }
}

/// Recursively overlays `top` onto `base`.
fn overlay(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::default();
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.r_range {
        cfg.r_range = v;
    }
    if let Some(v) = args.s_range {
        cfg.s_range = v;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.delta_min {
        cfg.delta_min = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.spike_mode {
        cfg.spike_mode = v;
    }
    if let Some(v) = args.max_iters {
        cfg.solver.max_iters = v;
    }
    if let Some(v) = args.points_per_axis {
        cfg.recovery.points_per_axis = v;
    }
    if let Some(v) = args.max_nonconverged_fraction {
        cfg.max_nonconverged_fraction = v;
    }
    if let Some(v) = &args.output {
        cfg.output = v.clone();
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let file: toml::Value =
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let mut merged = toml::Value::try_from(&cfg).map_err(|e| Failure::Config(e.to_string()))?;
        overlay(&mut merged, file);
        cfg = merged
            .try_into()
            .map_err(|e: toml::de::Error| Failure::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(cfg)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn check_convergence(bad: usize, total: usize, limit: f64) -> Result<(), Failure> {
    let frac = if total == 0 { 0.0 } else { bad as f64 / total as f64 };
    if frac > limit {
        return Err(Failure::NonConverged(format!(
            "{bad} of {total} solves did not converge ({frac:.3} > {limit})"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Single { r, s, trial, exp } => {
            let cfg = load_config(&exp)?;
            let rec = run_single_trial(&cfg, r, s, trial)?;
            print_json(&rec)?;
            let bad = usize::from(rec.diagnostics.is_some() && !rec.converged);
            check_convergence(bad, 1, cfg.max_nonconverged_fraction)
        }
        Command::Phase { exp, force } => {
            let cfg = load_config(&exp)?;
            cfg.validate()?;
            let dir: &Path = &cfg.output;
            if !force && dir.join(lse2d::harness::MANIFEST_FILE).exists() {
                return Err(Error::OutputExists(dir.to_path_buf()).into());
            }
            let outcome = run_phase_transition(&cfg)?;
            let written = emit_artifacts(&cfg, &outcome.records, &outcome.table, &outcome.violations, dir, force)?;
            for c in &outcome.table.cells {
                println!("r={} s={} success_rate={:.3}", c.r, c.s, c.rate);
            }
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            let bad = outcome.table.cells.iter().map(|c| c.nonconverged).sum();
            check_convergence(bad, outcome.records.len(), cfg.max_nonconverged_fraction)
        }
        Command::Certify {
            m,
            r,
            s,
            separation,
            lambda,
            patterns,
            seed,
            grid_points,
            near_radius,
        } => {
            let cfg = LabConfig {
                m,
                r,
                s,
                separation,
                lambda,
                patterns,
                seed,
                validation: ValidationOptions {
                    grid_points,
                    near_radius,
                    ..ValidationOptions::default()
                },
            };
            print_json(&certificate_lab(&cfg)?)
        }
        Command::VerifyBounds {
            m,
            b_atoms,
            b_samples,
            e_atoms,
            e_sets,
            separation,
            seed,
        } => {
            let cfg = BoundsConfig {
                m,
                b_atoms,
                b_samples,
                e_atoms,
                e_sets,
                separation,
                seed,
            };
            print_json(&verify_bounds(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
