//! Command-line front end: `gen`, `exact`, `solve` and `sweep`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vqeg_core::lp::SUPPORT_ENUM_MAX;
use vqeg_core::{
    embed_dominated, nash_gap, payoff, solve_lp, solve_support_enum, EgConfig, GameInstance, GameKind, PayoffMatrix,
    ShotMode, DEFAULT_C_MARGIN,
};

use crate::config::{pick, pick_list, pick_switch, ConfigFile};
use crate::error::{Error, Result};
use crate::matrix_io::{read_matrix, to_json, write_matrix};
use crate::runner::{best_run, run_seeds, thread_pool, threads_from_env};
use crate::sweep::{aggregate, format_table, run_sweep, summary_path, traces_dir, SweepSettings};
use crate::trace::{write_trace_file, TraceSummary};

const VERIFY_TOL: f64 = 1e-9;
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "vqeg", version, about = "Variational quantum extragradient solver for zero-sum matrix games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a game instance and write it as a JSON matrix file.
    Gen(GenArgs),
    /// Solve a game exactly by linear programming.
    Exact(ExactArgs),
    /// Run the extragradient solver on one game.
    Solve(SolveArgs),
    /// Run a grid of solver runs and summarize them.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Default)]
pub struct GameArgs {
    /// Instance class: dominant, pennies or random.
    #[arg(long)]
    pub game: Option<GameKind>,
    /// Number of actions per player.
    #[arg(long)]
    pub size: Option<usize>,
    /// Instance seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read the game from a JSON matrix file instead of generating it.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Output file; the matrix is printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Cross-check the LP against support enumeration.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Step size.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Number of extragradient iterations.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Ansatz layers per player.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Half-width of the parameter box.
    #[arg(long = "box")]
    pub box_halfwidth: Option<f64>,
    /// Record a trace line every N iterations.
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Number of run seeds (best of K).
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Use exact expectations instead of shot estimates.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Measurement shots per circuit evaluation.
    #[arg(long)]
    pub shots: Option<usize>,
    /// JSONL trace of the best run.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Instance classes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub game: Option<Vec<GameKind>>,
    /// Sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub size: Option<Vec<usize>>,
    /// Instance seed; run seeds are seed .. seed + seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shot budgets, comma separated; `exact` is accepted as an entry.
    #[arg(long, value_delimiter = ',')]
    pub shots: Option<Vec<ShotMode>>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory for traces and the summary CSV.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

/// Where the game comes from after merging flags and config file.
#[derive(Debug, Clone, PartialEq)]
pub enum GameSource {
    File(PathBuf),
    Generated { kind: GameKind, size: usize, seed: u64 },
}

impl GameSource {
    fn resolve(args: GameArgs, file: &ConfigFile) -> Result<Self> {
        let matrix = pick(args.matrix, file, "matrix")?;
        let kind = pick(args.game, file, "game")?;
        let size = pick(args.size, file, "size")?;
        let seed = pick(args.seed, file, "seed")?.unwrap_or(0);
        match (matrix, kind, size) {
            (Some(_), Some(_), _) => Err(Error::Usage("--matrix and --game are mutually exclusive".into())),
            (Some(p), None, _) => Ok(GameSource::File(p)),
            (None, Some(kind), Some(size)) => Ok(GameSource::Generated { kind, size, seed }),
            (None, Some(_), None) => Err(Error::Usage("--game needs --size".into())),
            (None, None, _) => Err(Error::Usage("give either --matrix PATH or --game KIND --size N".into())),
        }
    }

    fn load(&self) -> Result<(PayoffMatrix, String)> {
        match self {
            GameSource::File(p) => Ok((read_matrix(p)?, p.display().to_string())),
            GameSource::Generated { kind, size, seed } => {
                let g = GameInstance::generate(*kind, *size, *seed)?;
                Ok((g.matrix, g.label))
            }
        }
    }

    fn echo(&self, m: &mut BTreeMap<String, String>) {
        match self {
            GameSource::File(p) => {
                m.insert("matrix".into(), p.display().to_string());
            }
            GameSource::Generated { kind, size, seed } => {
                m.insert("game".into(), kind.to_string());
                m.insert("size".into(), size.to_string());
                m.insert("seed".into(), seed.to_string());
            }
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let file = load_config(&args.config)?;
    let out = pick(args.out, &file, "out")?;
    let source = GameSource::resolve(args.game, &file)?;
    if matches!(source, GameSource::File(_)) {
        return Err(Error::Usage("gen needs --game and --size".into()));
    }
    let (a, label) = source.load()?;
    let info = format!("{label}: {}x{}, max |a_ij| = {}", a.rows(), a.cols(), a.max_abs());
    match out {
        Some(p) => {
            write_matrix(&p, &a)?;
            println!("{info}");
            println!("wrote {}", p.display());
        }
        None => {
            eprintln!("{info}");
            println!("{}", to_json(&a));
        }
    }
    Ok(())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let file = load_config(&args.config)?;
    let verify = pick_switch(args.verify, &file, "verify")?;
    let (a, label) = GameSource::resolve(args.game, &file)?.load()?;
    let sol = solve_lp(&a)?;
    let gap = nash_gap(&a, &sol.x_star, &sol.y_star)?;
    let row_support = sol.x_star.support(SUPPORT_TOL);
    let col_support = sol.y_star.support(SUPPORT_TOL);

    println!("game: {label} ({}x{})", a.rows(), a.cols());
    println!("value: {}", sol.value);
    println!("row support: {row_support:?}");
    println!("col support: {col_support:?}");
    println!("nash gap: {gap:e}");

    let mut verified = None;
    if verify {
        if a.rows() > SUPPORT_ENUM_MAX || a.cols() > SUPPORT_ENUM_MAX {
            return Err(Error::Usage(format!("--verify supports games up to {SUPPORT_ENUM_MAX}x{SUPPORT_ENUM_MAX}")));
        }
        let check = solve_support_enum(&a)?;
        let diff = (check.value - sol.value).abs();
        println!("support enumeration value: {} (difference {diff:e})", check.value);
        if diff > VERIFY_TOL || gap > VERIFY_TOL {
            return Err(Error::Verification(format!(
                "value difference {diff:e}, gap {gap:e}, tolerance {VERIFY_TOL:e}"
            )));
        }
        verified = Some(true);
    }
    let report = json!({
        "value": sol.value,
        "x_star": sol.x_star.probs(),
        "y_star": sol.y_star.probs(),
        "row_support": row_support,
        "col_support": col_support,
        "gap": gap,
        "verified": verified,
    });
    println!("{report}");
    Ok(())
}

/// Resolved settings for `solve`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub source: GameSource,
    pub run_seed: u64,
    pub seeds: usize,
    pub config: EgConfig,
    pub out: Option<PathBuf>,
}

impl SolveSettings {
    pub fn echo(&self) -> BTreeMap<String, String> {
        let c = &self.config;
        let mut m = BTreeMap::new();
        self.source.echo(&mut m);
        m.insert("seed".into(), self.run_seed.to_string());
        m.insert("seeds".into(), self.seeds.to_string());
        m.insert("eta".into(), c.eta.to_string());
        m.insert("steps".into(), c.steps.to_string());
        match c.shots {
            ShotMode::Exact => m.insert("exact".into(), "true".into()),
            ShotMode::Shots(s) => m.insert("shots".into(), s.to_string()),
        };
        m.insert("layers".into(), c.layers_row.to_string());
        m.insert("box".into(), c.box_halfwidth.to_string());
        m.insert("record-every".into(), c.record_every.to_string());
        m
    }
}

struct CommonRun {
    seeds: usize,
    config: EgConfig,
}

fn resolve_run(run: RunArgs, shots: Option<ShotMode>, file: &ConfigFile, size: usize) -> Result<CommonRun> {
    let defaults = EgConfig::for_size(size);
    let layers = pick(run.layers, file, "layers")?.unwrap_or(defaults.layers_row);
    let config = EgConfig {
        steps: pick(run.steps, file, "steps")?.unwrap_or(defaults.steps),
        eta: pick(run.eta, file, "eta")?.unwrap_or(defaults.eta),
        shots: shots.unwrap_or(ShotMode::Exact),
        box_halfwidth: pick(run.box_halfwidth, file, "box")?.unwrap_or(defaults.box_halfwidth),
        layers_row: layers,
        layers_col: layers,
        record_every: pick(run.record_every, file, "record-every")?.unwrap_or(defaults.record_every),
        ..defaults
    };
    let seeds = pick(run.seeds, file, "seeds")?.unwrap_or(1);
    if seeds == 0 {
        return Err(Error::Usage("--seeds must be at least 1".into()));
    }
    config.validate()?;
    Ok(CommonRun { seeds, config })
}

pub fn resolve_solve(args: SolveArgs) -> Result<(SolveSettings, PayoffMatrix, String)> {
    let file = load_config(&args.run.config)?;
    let exact = pick_switch(args.run.exact, &file, "exact")?;
    let shots = match (pick(args.shots, &file, "shots")?, exact) {
        (Some(_), true) => return Err(Error::Usage("--shots and --exact are mutually exclusive".into())),
        (Some(n), false) => Some(ShotMode::shots(n)?),
        (None, _) => Some(ShotMode::Exact),
    };
    let run_seed = pick(args.game.seed, &file, "seed")?.unwrap_or(0);
    let out = pick(args.out, &file, "out")?;
    let source = GameSource::resolve(args.game, &file)?;
    let (a, label) = source.load()?;
    let common = resolve_run(args.run, shots, &file, a.rows().max(a.cols()))?;
    let settings = SolveSettings {
        source,
        run_seed,
        seeds: common.seeds,
        config: EgConfig { seed: run_seed, ..common.config },
        out,
    };
    Ok((settings, a, label))
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let (settings, a, label) = resolve_solve(args)?;
    let cfg = &settings.config;
    let embedded = embed_dominated(&a, DEFAULT_C_MARGIN)?;
    println!(
        "game: {label} ({}x{}, embedded {}x{}), layers {}, eta {}, steps {}, shots {}",
        a.rows(),
        a.cols(),
        embedded.padded_rows(),
        embedded.padded_cols(),
        cfg.layers_row,
        cfg.eta,
        cfg.steps,
        cfg.shots
    );

    let pool = thread_pool(threads_from_env()?)?;
    let runs = pool.install(|| run_seeds(&a, cfg, settings.run_seed, settings.seeds))?;
    if runs.len() > 1 {
        for r in &runs {
            println!(
                "seed {}: gap_last {:.3e}, gap_avg {:.3e} [{}]",
                r.seed,
                r.result.final_gap_last,
                r.result.final_gap_avg,
                verdict(r.result.passed)
            );
        }
    }
    let best = best_run(&runs).expect("at least one seed");
    let res = &best.result;

    let value_error =
        solve_lp(&a).ok().and_then(|sol| payoff(&a, &res.last_x, &res.last_y).ok().map(|v| (v - sol.value).abs()));

    if runs.len() > 1 {
        println!("best seed: {}", best.seed);
    }
    println!("gap_last: {:e}", res.final_gap_last);
    println!("gap_avg: {:e}", res.final_gap_avg);
    match value_error {
        Some(e) => println!("value error: {e:e}"),
        None => println!("value error: unavailable (LP failed)"),
    }
    println!("leakage: row {:e}, col {:e}", res.final_leak_row, res.final_leak_col);
    println!("circuit evaluations: {}", res.total_evals);
    println!("{} (tolerance {:e})", verdict(res.passed), cfg.tolerance);

    if let Some(path) = &settings.out {
        let best_cfg = EgConfig { seed: best.seed, ..cfg.clone() };
        // The echo keeps the instance seed and seed count, so re-running it
        // repeats the whole best-of-K selection.
        let echo = settings.echo();
        write_trace_file(path, &best.trace, &TraceSummary::new(res, &best_cfg, echo))?;
        println!("trace: {}", path.display());
    }
    Ok(())
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn resolve_sweep(args: SweepArgs) -> Result<SweepSettings> {
    let file = load_config(&args.run.config)?;
    let kinds = pick_list(args.game, &file, "game")?.unwrap_or_else(|| vec![GameKind::DominantRow]);
    let sizes = pick_list(args.size, &file, "size")?.unwrap_or_else(|| vec![4]);
    let seed = pick(args.seed, &file, "seed")?.unwrap_or(0);
    let exact = pick_switch(args.run.exact, &file, "exact")?;
    let mut shots = pick_list(args.shots, &file, "shots")?.unwrap_or_default();
    if exact && !shots.contains(&ShotMode::Exact) {
        shots.insert(0, ShotMode::Exact);
    }
    if shots.is_empty() {
        shots.push(ShotMode::Exact);
    }
    let out_dir =
        pick(args.out_dir, &file, "out-dir")?.ok_or_else(|| Error::Usage("sweep needs --out-dir PATH".into()))?;
    let layers = pick(args.run.layers, &file, "layers")?;
    let size0 = sizes.first().copied().unwrap_or(2);
    let common = resolve_run(args.run, None, &file, size0)?;
    let settings = SweepSettings {
        kinds,
        sizes,
        seed,
        seeds: common.seeds,
        shots,
        eta: common.config.eta,
        steps: common.config.steps,
        layers,
        box_halfwidth: common.config.box_halfwidth,
        record_every: common.config.record_every,
        out_dir,
    };
    settings.validate()?;
    Ok(settings)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let settings = resolve_sweep(args)?;
    let pool = thread_pool(threads_from_env()?)?;
    let outcomes = pool.install(|| run_sweep(&settings))?;
    print!("{}", format_table(&aggregate(&outcomes)));
    let failed = outcomes.iter().filter(|o| !o.error.is_empty()).count();
    if failed > 0 {
        eprintln!("{failed} cell(s) failed; see the error column");
    }
    println!("summary: {}", summary_path(&settings.out_dir).display());
    println!("traces: {}", traces_dir(&settings.out_dir).display());
    Ok(())
}
