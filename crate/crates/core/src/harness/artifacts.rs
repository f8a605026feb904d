use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::phase::SuccessTable;
use super::trial::TrialRecord;
use crate::error::{Error, Result};

pub const TRIALS_FILE: &str = "trials.jsonl";
pub const CSV_FILE: &str = "success_rates.csv";
pub const PGM_FILE: &str = "success_rates.pgm";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

const ALL_FILES: [&str; 5] = [TRIALS_FILE, CSV_FILE, PGM_FILE, MANIFEST_FILE, TIMINGS_FILE];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// How each trial's random stream is derived from the seed.
    pub stream_rule: String,
    pub lambda: f64,
    pub delta_min: f64,
    pub config: ExperimentConfig,
    pub trials_recorded: usize,
    pub nonconverged_fraction: f64,
    pub monotonicity_violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub r: usize,
    pub s: usize,
    pub wall_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_secs: f64,
    pub cells: Vec<CellTiming>,
}

/// `r,s,success_rate` with three fractional digits, cells in table order.
pub fn encode_csv(table: &SuccessTable) -> String {
    let mut out = String::from("r,s,success_rate\n");
    for c in &table.cells {
        out.push_str(&format!("{},{},{:.3}\n", c.r, c.s, c.rate));
    }
    out
}

pub fn decode_csv(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some("r,s,success_rate") {
        return Err(Error::InvalidInput("missing CSV header r,s,success_rate".into()));
    }
    lines
        .map(|line| {
            let parts: Vec<&str> = line.split(',').collect();
            let bad = || Error::InvalidInput(format!("malformed CSV row {line:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok((
                parts[0].parse().map_err(|_| bad())?,
                parts[1].parse().map_err(|_| bad())?,
                parts[2].parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

/// Gray level of a success rate, rounding halves up.
pub fn gray_level(rate: f64) -> u8 {
    (rate.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Binary graymap with one pixel per cell: rows are `s` ascending, columns
/// `r` ascending.
pub fn encode_pgm(table: &SuccessTable) -> Vec<u8> {
    let (w, h) = (table.r_values.len(), table.s_values.len());
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for &s in &table.s_values {
        for &r in &table.r_values {
            out.push(gray_level(table.rate(r, s).unwrap_or(0.0)));
        }
    }
    out
}

/// Width, height and row-major pixels of a binary graymap with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |why: &str| Error::InvalidInput(format!("malformed graymap: {why}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?.to_string());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected P5 with maxval 255"));
    }
    let w: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
    if data.len() != w * h {
        return Err(bad("raster size"));
    }
    Ok((w, h, data.to_vec()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

/// Writes the run artifacts into `dir` and returns the paths written. An
/// empty run writes only the manifest and the CSV header. Existing artifacts
/// are only replaced when `force` is set.
pub fn emit_artifacts(
    config: &ExperimentConfig,
    records: &[TrialRecord],
    table: &SuccessTable,
    violations: &[String],
    dir: &Path,
    force: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if !force && ALL_FILES.iter().any(|f| dir.join(f).exists()) {
        return Err(Error::OutputExists(dir.to_path_buf()));
    }
    if force {
        for f in ALL_FILES {
            let p = dir.join(f);
            if p.exists() {
                fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
            }
        }
    }

    let mut written = Vec::new();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        stream_rule: "ChaCha8 seeded with seed, stream (r << 40) | (s << 20) | trial".into(),
        lambda: config.lambda_value(),
        delta_min: config.delta_value(),
        config: config.clone(),
        trials_recorded: records.len(),
        nonconverged_fraction: table.nonconverged_fraction(),
        monotonicity_violations: violations.to_vec(),
    };
    let path = dir.join(MANIFEST_FILE);
    write(&path, &to_json(&manifest))?;
    written.push(path);

    let path = dir.join(CSV_FILE);
    write(&path, encode_csv(table).as_bytes())?;
    written.push(path);

    if records.is_empty() && table.is_empty() {
        return Ok(written);
    }

    let mut lines = String::new();
    for rec in records {
        lines.push_str(&serde_json::to_string(rec).expect("serializable"));
        lines.push('\n');
    }
    let path = dir.join(TRIALS_FILE);
    write(&path, lines.as_bytes())?;
    written.push(path);

    if !table.is_empty() {
        let path = dir.join(PGM_FILE);
        write(&path, &encode_pgm(table))?;
        written.push(path);
    }

    let timings = Timings {
        total_secs: records.iter().map(|r| r.wall_secs).sum(),
        cells: table
            .cells
            .iter()
            .map(|c| CellTiming {
                r: c.r,
                s: c.s,
                wall_secs: c.wall_secs,
            })
            .collect(),
    };
    let path = dir.join(TIMINGS_FILE);
    write(&path, &to_json(&timings))?;
    written.push(path);
    Ok(written)
}
