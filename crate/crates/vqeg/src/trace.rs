//! JSON Lines traces: one object per recorded iteration, then a summary
//! object carrying the resolved configuration.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use vqeg_core::{RunResult, RunTrace, ShotMode, TraceRecord};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub t: usize,
    pub value: f64,
    pub gap: f64,
    pub avg_gap: f64,
    pub residual: f64,
    pub leak_row: f64,
    pub leak_col: f64,
    pub evals: u64,
}

impl From<&TraceRecord> for TraceLine {
    fn from(r: &TraceRecord) -> Self {
        TraceLine {
            t: r.t,
            value: r.value,
            gap: r.gap,
            avg_gap: r.avg_gap,
            residual: r.residual,
            leak_row: r.leak_row,
            leak_col: r.leak_col,
            evals: r.evals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub final_gap_last: f64,
    pub final_gap_avg: f64,
    pub passed: bool,
    pub seed: u64,
    pub eta: f64,
    /// `"exact"` or the shot count.
    pub shots: Value,
    pub layers: usize,
    #[serde(rename = "T")]
    pub steps: usize,
    pub config: BTreeMap<String, String>,
}

impl TraceSummary {
    pub fn new(result: &RunResult, cfg: &vqeg_core::EgConfig, config: BTreeMap<String, String>) -> Self {
        TraceSummary {
            final_gap_last: result.final_gap_last,
            final_gap_avg: result.final_gap_avg,
            passed: result.passed,
            seed: cfg.seed,
            eta: cfg.eta,
            shots: shots_value(cfg.shots),
            layers: cfg.layers_row,
            steps: cfg.steps,
            config,
        }
    }
}

pub fn shots_value(mode: ShotMode) -> Value {
    match mode.count() {
        Some(s) => Value::from(s),
        None => Value::from("exact"),
    }
}

pub fn write_trace<W: Write>(mut w: W, trace: &RunTrace, summary: &TraceSummary) -> Result<()> {
    for r in &trace.records {
        serde_json::to_writer(&mut w, &TraceLine::from(r))?;
        w.write_all(b"\n").map_err(|e| Error::io("<trace>", e))?;
    }
    serde_json::to_writer(&mut w, summary)?;
    w.write_all(b"\n").map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &RunTrace, summary: &TraceSummary) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_trace(&mut w, trace, summary)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trace back into its records and summary.
pub fn read_trace(path: &Path) -> Result<(Vec<TraceLine>, TraceSummary)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    let last = lines.pop().ok_or_else(|| Error::Usage(format!("{}: empty trace", path.display())))?;
    let summary = serde_json::from_str(&last)?;
    let records = lines.iter().map(|l| serde_json::from_str(l)).collect::<Result<_, _>>()?;
    Ok((records, summary))
}
