//! Grid sweeps over game kind × size × seed × shot budget.
//!
//! Every cell writes its own trace; the summary CSV is assembled after all
//! cells finish, in grid order, so its content does not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use vqeg_core::{default_layers, EgConfig, GameInstance, GameKind, ShotMode, PASS_TOLERANCE};

use crate::config::render;
use crate::error::{Error, Result};
use crate::runner::run_timed;
use crate::trace::{write_trace_file, TraceSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub kinds: Vec<GameKind>,
    pub sizes: Vec<usize>,
    /// Instance seed; run seeds are `seed .. seed + seeds`.
    pub seed: u64,
    pub seeds: usize,
    pub shots: Vec<ShotMode>,
    pub eta: f64,
    pub steps: usize,
    /// Fixed depth, or `None` for the size-dependent default.
    pub layers: Option<usize>,
    pub box_halfwidth: f64,
    pub record_every: usize,
    pub out_dir: PathBuf,
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty() || self.sizes.is_empty() || self.shots.is_empty() || self.seeds == 0 {
            return Err(Error::Usage("sweep grids must be non-empty".into()));
        }
        self.eg_config(self.sizes[0], ShotMode::Exact, self.seed)?.validate()?;
        Ok(())
    }

    pub fn eg_config(&self, size: usize, shots: ShotMode, seed: u64) -> Result<EgConfig> {
        let layers = self.layers.unwrap_or_else(|| default_layers(size));
        Ok(EgConfig {
            steps: self.steps,
            eta: self.eta,
            shots,
            box_halfwidth: self.box_halfwidth,
            seed,
            layers_row: layers,
            layers_col: layers,
            record_every: self.record_every,
            ..EgConfig::default()
        })
    }

    /// The resolved settings in config-file form.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let join = |v: Vec<String>| v.join(",");
        let mut m = BTreeMap::new();
        m.insert("game".into(), join(self.kinds.iter().map(|k| k.to_string()).collect()));
        m.insert("size".into(), join(self.sizes.iter().map(|s| s.to_string()).collect()));
        m.insert("seed".into(), self.seed.to_string());
        m.insert("seeds".into(), self.seeds.to_string());
        m.insert("shots".into(), join(self.shots.iter().map(|s| s.to_string()).collect()));
        m.insert("eta".into(), self.eta.to_string());
        m.insert("steps".into(), self.steps.to_string());
        if let Some(l) = self.layers {
            m.insert("layers".into(), l.to_string());
        }
        m.insert("box".into(), self.box_halfwidth.to_string());
        m.insert("record-every".into(), self.record_every.to_string());
        m.insert("out-dir".into(), self.out_dir.display().to_string());
        m
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &kind in &self.kinds {
            for &size in &self.sizes {
                for k in 0..self.seeds as u64 {
                    for &shots in &self.shots {
                        cells.push(Cell { kind, size, seed: self.seed + k, shots });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub kind: GameKind,
    pub size: usize,
    pub seed: u64,
    pub shots: ShotMode,
}

impl Cell {
    pub fn trace_name(&self) -> String {
        format!("{}_{}_seed{}_{}.jsonl", self.kind, self.size, self.seed, self.shots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutcome {
    pub kind: String,
    pub size: usize,
    pub seed: u64,
    pub shots: String,
    pub gap_last: Option<f64>,
    pub gap_avg: Option<f64>,
    pub passed: bool,
    pub wall_ms: u128,
    pub evals: u64,
    pub error: String,
}

impl CellOutcome {
    pub fn best_gap(&self) -> Option<f64> {
        match (self.gap_last, self.gap_avg) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

pub fn traces_dir(out_dir: &Path) -> PathBuf {
    out_dir.join("traces")
}

pub fn summary_path(out_dir: &Path) -> PathBuf {
    out_dir.join("summary.csv")
}

fn run_cell(settings: &SweepSettings, cell: Cell, echo: &BTreeMap<String, String>) -> CellOutcome {
    let mut out = CellOutcome {
        kind: cell.kind.to_string(),
        size: cell.size,
        seed: cell.seed,
        shots: cell.shots.to_string(),
        gap_last: None,
        gap_avg: None,
        passed: false,
        wall_ms: 0,
        evals: 0,
        error: String::new(),
    };
    let mut attempt = || -> Result<()> {
        let instance = GameInstance::generate(cell.kind, cell.size, settings.seed)?;
        let cfg = settings.eg_config(cell.size, cell.shots, cell.seed)?;
        let run = run_timed(&instance.matrix, &cfg)?;
        out.gap_last = Some(run.result.final_gap_last);
        out.gap_avg = Some(run.result.final_gap_avg);
        out.passed = run.result.passed;
        out.wall_ms = run.wall.as_millis();
        out.evals = run.result.total_evals;
        let mut config = echo.clone();
        config.insert("game".into(), cell.kind.to_string());
        config.insert("size".into(), cell.size.to_string());
        config.insert("seed".into(), cell.seed.to_string());
        config.insert("shots".into(), cell.shots.to_string());
        config.insert("layers".into(), cfg.layers_row.to_string());
        config.remove("seeds");
        config.remove("out-dir");
        let summary = TraceSummary::new(&run.result, &cfg, config);
        write_trace_file(&traces_dir(&settings.out_dir).join(cell.trace_name()), &run.trace, &summary)
    };
    if let Err(e) = attempt() {
        out.passed = false;
        out.error = e.to_string();
    }
    out
}

/// Runs the whole grid on the current rayon pool and writes the trace
/// directory, `summary.csv` and `sweep_config.txt` under `out_dir`.
pub fn run_sweep(settings: &SweepSettings) -> Result<Vec<CellOutcome>> {
    settings.validate()?;
    let traces = traces_dir(&settings.out_dir);
    fs::create_dir_all(&traces).map_err(|e| Error::io(&traces, e))?;
    let echo = settings.echo();
    let cfg_path = settings.out_dir.join("sweep_config.txt");
    fs::write(&cfg_path, render(&echo)).map_err(|e| Error::io(&cfg_path, e))?;

    let cells = settings.cells();
    let outcomes: Vec<CellOutcome> = cells.par_iter().map(|&c| run_cell(settings, c, &echo)).collect();

    let path = summary_path(&settings.out_dir);
    let mut w = csv::Writer::from_path(&path)?;
    for o in &outcomes {
        w.serialize(o)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub kind: String,
    pub size: usize,
    pub shots: String,
    pub runs: usize,
    pub failed: usize,
    /// Mean over seeds of each run's certified gap.
    pub avg_gap: Option<f64>,
    pub best_gap: Option<f64>,
    pub passed: bool,
}

/// Per-(kind, size, shots) average and best gap over seeds.
pub fn aggregate(outcomes: &[CellOutcome]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = Vec::new();
    for o in outcomes {
        let idx = match rows.iter().position(|r| r.kind == o.kind && r.size == o.size && r.shots == o.shots) {
            Some(i) => i,
            None => {
                rows.push(AggregateRow {
                    kind: o.kind.clone(),
                    size: o.size,
                    shots: o.shots.clone(),
                    runs: 0,
                    failed: 0,
                    avg_gap: None,
                    best_gap: None,
                    passed: false,
                });
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        row.runs += 1;
        match o.best_gap() {
            Some(g) => {
                // Running sum in avg_gap; divided below.
                row.avg_gap = Some(row.avg_gap.unwrap_or(0.0) + g);
                row.best_gap = Some(row.best_gap.map_or(g, |b: f64| b.min(g)));
            }
            None => row.failed += 1,
        }
        row.passed |= o.passed;
    }
    for row in &mut rows {
        let ok = row.runs - row.failed;
        row.avg_gap = row.avg_gap.map(|s| s / ok as f64);
    }
    rows
}

pub fn format_table(rows: &[AggregateRow]) -> String {
    let fmt = |g: Option<f64>| g.map_or("-".to_string(), |g| format!("{g:.3e}"));
    let mut s = format!(
        "{:<10} {:>6} {:>7} {:>5} {:>11} {:>11}  {}\n",
        "game", "size", "shots", "runs", "gap (avg)", "gap (best)", "pass"
    );
    for r in rows {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "{:<10} {:>6} {:>7} {:>5} {:>11} {:>11}  {verdict}",
            r.kind,
            format!("{0}x{0}", r.size),
            r.shots,
            r.runs,
            fmt(r.avg_gap),
            fmt(r.best_gap)
        ));
        if r.failed > 0 {
            s.push_str(&format!(" ({} failed)", r.failed));
        }
        s.push('\n');
    }
    s.push_str(&format!("pass: best certified gap <= {PASS_TOLERANCE:e}\n"));
    s
}
