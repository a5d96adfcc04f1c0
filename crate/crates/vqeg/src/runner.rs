//! Multi-seed runs and the worker pool shared by `solve` and `sweep`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use vqeg_core::{run, EgConfig, PayoffMatrix, RunResult, RunTrace};

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "VQEG_THREADS";

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub result: RunResult,
    pub trace: RunTrace,
    pub wall: Duration,
}

/// Thread count from `VQEG_THREADS`; `None` means all available cores.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

pub fn run_timed(a: &PayoffMatrix, cfg: &EgConfig) -> Result<SeedRun> {
    let start = Instant::now();
    let (result, trace) = run(a, cfg)?;
    Ok(SeedRun { seed: cfg.seed, result, trace, wall: start.elapsed() })
}

/// Runs seeds `first .. first + count` in parallel on the current pool.
/// Results come back in seed order.
pub fn run_seeds(a: &PayoffMatrix, base: &EgConfig, first: u64, count: usize) -> Result<Vec<SeedRun>> {
    (0..count as u64).into_par_iter().map(|k| run_timed(a, &EgConfig { seed: first + k, ..base.clone() })).collect()
}

/// The run with the smallest certified gap; ties go to the lower seed.
pub fn best_run(runs: &[SeedRun]) -> Option<&SeedRun> {
    runs.iter().min_by(|a, b| a.result.best_gap().total_cmp(&b.result.best_gap()).then(a.seed.cmp(&b.seed)))
}
