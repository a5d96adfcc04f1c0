//! Projected extragradient over circuit parameters.
//!
//! Each iteration makes a predictor move from `ω_t` along `G(ω_t)` and a
//! corrector move from `ω_t` along `G(ω_{t+½})`, both projected onto the
//! parameter box `[−h, h]^d`. The row player ascends `L` and the column
//! player descends it, so with `G = (∇_θ L, −∇_φ L)` both moves go in the
//! `+η G` direction.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::game::{dot, embed_dominated, nash_gap, restrict_strategy, MixedStrategy, PayoffMatrix};
use crate::oracle::{GradientEstimate, JointParams, OpponentMode, PayoffOracle, SaddleField, ShotMode};
use crate::qstate::AnsatzSpec;
use crate::rng::StreamKey;

/// Pass tolerance on the Nash gap.
pub const PASS_TOLERANCE: f64 = 5e-3;

/// Fraction of recorded iterates averaged into the tail-average strategy.
pub const TAIL_FRACTION: f64 = 0.2;

/// Half-width of the initialization cube around the origin.
pub const INIT_HALFWIDTH: f64 = 0.1;

/// Default ansatz depth for a game with `size` actions per player.
pub fn default_layers(size: usize) -> usize {
    if size <= 8 {
        3
    } else {
        4
    }
}

/// Configuration of one extragradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct EgConfig {
    pub steps: usize,
    pub eta: f64,
    pub shots: ShotMode,
    pub box_halfwidth: f64,
    pub seed: u64,
    pub layers_row: usize,
    pub layers_col: usize,
    pub record_every: usize,
    /// Margin added to `‖A‖_∞` to form the dominance constant.
    pub c_margin: f64,
    pub opponent: OpponentMode,
    pub tolerance: f64,
}

impl Default for EgConfig {
    fn default() -> Self {
        EgConfig {
            steps: 2000,
            eta: 0.1,
            shots: ShotMode::Exact,
            box_halfwidth: 2.0 * PI,
            seed: 0,
            layers_row: 3,
            layers_col: 3,
            record_every: 1,
            c_margin: crate::game::DEFAULT_C_MARGIN,
            opponent: OpponentMode::Sampled,
            tolerance: PASS_TOLERANCE,
        }
    }
}

impl EgConfig {
    /// Defaults with the ansatz depth chosen for a `size × size` game.
    pub fn for_size(size: usize) -> Self {
        let layers = default_layers(size);
        EgConfig { layers_row: layers, layers_col: layers, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be positive and finite");
        }
        if !(self.box_halfwidth > 0.0 && self.box_halfwidth.is_finite()) {
            return bad("box half-width must be positive and finite");
        }
        if self.layers_row == 0 || self.layers_col == 0 {
            return bad("layers must be at least 1");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if self.c_margin.is_nan() || self.c_margin <= 0.0 {
            return bad("dominance margin must be positive");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return bad("tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Euclidean projection onto `[−h, h]^d`, i.e. coordinate-wise clamping.
pub fn project_box(w: &JointParams, halfwidth: f64) -> JointParams {
    let mut out = w.clone();
    clamp_in_place(out.as_mut_slice(), halfwidth);
    out
}

fn clamp_in_place(v: &mut [f64], h: f64) {
    v.iter_mut().for_each(|x| *x = x.clamp(-h, h));
}

/// `Π(ω + η g)`.
fn projected_move(w: &JointParams, g: &[f64], eta: f64, halfwidth: f64) -> Result<JointParams> {
    let values = w.as_slice().iter().zip(g).map(|(x, d)| (x + eta * d).clamp(-halfwidth, halfwidth)).collect();
    w.with_values(values)
}

/// Result of one extragradient iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EgStep {
    pub next: JointParams,
    pub half: JointParams,
    pub circuit_evals: usize,
}

/// One projected extragradient iteration with two operator evaluations.
pub fn eg_step<F: SaddleField + ?Sized>(
    field: &F,
    w: &JointParams,
    eta: f64,
    halfwidth: f64,
    mode: ShotMode,
    key: StreamKey,
) -> Result<EgStep> {
    let predictor = field.evaluate(w, mode, key.child(0))?;
    corrector_step(field, w, &predictor, eta, halfwidth, mode, key)
}

fn corrector_step<F: SaddleField + ?Sized>(
    field: &F,
    w: &JointParams,
    predictor: &GradientEstimate,
    eta: f64,
    halfwidth: f64,
    mode: ShotMode,
    key: StreamKey,
) -> Result<EgStep> {
    let half = projected_move(w, &predictor.g, eta, halfwidth)?;
    let corrector = field.evaluate(&half, mode, key.child(1))?;
    let next = projected_move(w, &corrector.g, eta, halfwidth)?;
    Ok(EgStep { next, half, circuit_evals: predictor.circuit_evals + corrector.circuit_evals })
}

/// `‖(ω − Π(ω + η G(ω))) / η‖₂` from an already evaluated operator.
pub fn residual_from_operator(w: &JointParams, g: &[f64], eta: f64, halfwidth: f64) -> f64 {
    let sq: f64 = w
        .as_slice()
        .iter()
        .zip(g)
        .map(|(x, d)| {
            let r = (x - (x + eta * d).clamp(-halfwidth, halfwidth)) / eta;
            r * r
        })
        .sum();
    libm::sqrt(sq)
}

/// Projected residual with the exact operator; zero exactly at first-order
/// stationary points of the box-constrained parametric game.
pub fn projected_residual<F: SaddleField + ?Sized>(
    field: &F,
    w: &JointParams,
    eta: f64,
    halfwidth: f64,
) -> Result<f64> {
    let g = field.evaluate(w, ShotMode::Exact, StreamKey::root(0))?;
    Ok(residual_from_operator(w, &g.g, eta, halfwidth))
}

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    /// Exact embedded payoff `L(ω_{t+1})`.
    pub value: f64,
    pub gap: f64,
    /// Gap of the running average of all recorded strategies so far.
    pub avg_gap: f64,
    /// Exact-operator projected residual at `ω_{t+1}`.
    pub residual: f64,
    pub leak_row: f64,
    pub leak_col: f64,
    /// Circuit evaluations spent so far.
    pub evals: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

/// Outcome of a run, certified on the original game.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_params: JointParams,
    pub last_x: MixedStrategy,
    pub last_y: MixedStrategy,
    pub avg_x: MixedStrategy,
    pub avg_y: MixedStrategy,
    pub final_gap_last: f64,
    pub final_gap_avg: f64,
    pub final_leak_row: f64,
    pub final_leak_col: f64,
    pub total_evals: u64,
    pub passed: bool,
}

impl RunResult {
    /// `min(gap_last, gap_avg)`, the quantity compared against the tolerance.
    pub fn best_gap(&self) -> f64 {
        self.final_gap_last.min(self.final_gap_avg)
    }
}

const TAG_INIT: u64 = 0;
const TAG_STEP: u64 = 1;

/// Runs projected extragradient on `a` and certifies every recorded iterate.
pub fn run(a: &PayoffMatrix, cfg: &EgConfig) -> Result<(RunResult, RunTrace)> {
    cfg.validate()?;
    if a.rows() < 2 || a.cols() < 2 {
        return Err(invalid("games need at least two actions per player"));
    }
    let game = embed_dominated(a, cfg.c_margin)?;
    let row = AnsatzSpec::for_actions(game.padded_rows(), cfg.layers_row)?;
    let col = AnsatzSpec::for_actions(game.padded_cols(), cfg.layers_col)?;
    let oracle = PayoffOracle::new(game, row, col)?.with_opponent_mode(cfg.opponent);
    let (m, n) = (a.rows(), a.cols());
    let d = oracle.param_dim();
    let (eta, h) = (cfg.eta, cfg.box_halfwidth);

    let root = StreamKey::root(cfg.seed);
    let mut init_rng = root.child(TAG_INIT).rng();
    let init: Vec<f64> = (0..d).map(|_| init_rng.random_range(-INIT_HALFWIDTH..=INIT_HALFWIDTH)).collect();
    let mut w = JointParams::from_flat(init, row.param_count())?;
    clamp_in_place(w.as_mut_slice(), h);

    let exact = cfg.shots.is_exact();
    let mut cached: Option<GradientEstimate> = None;
    let mut evals: u64 = 0;
    let mut trace = RunTrace::default();
    let mut sum_x = vec![0.0; m];
    let mut sum_y = vec![0.0; n];
    let mut history: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut last = None;

    for t in 0..cfg.steps {
        let key = root.child(TAG_STEP).child(t as u64);
        let predictor = match cached.take() {
            Some(g) => g,
            None => oracle.evaluate(&w, cfg.shots, key.child(0))?,
        };
        let step = corrector_step(&oracle, &w, &predictor, eta, h, cfg.shots, key)?;
        evals += step.circuit_evals as u64;
        w = step.next;

        let record = t % cfg.record_every == 0 || t + 1 == cfg.steps;
        // the exact operator at ω_{t+1} doubles as the next predictor
        let exact_g = if exact || record {
            let g = oracle.evaluate(&w, ShotMode::Exact, key.child(2))?;
            if exact {
                cached = Some(g.clone());
            }
            Some(g)
        } else {
            None
        };
        if !record {
            continue;
        }
        let (xt, yt) = oracle.strategies(&w)?;
        evals += 2;
        let value = dot(xt.probs(), &oracle.game().matrix().mul_vec(yt.probs()));
        let (x, leak_row) = restrict_strategy(&xt, m)?;
        let (y, leak_col) = restrict_strategy(&yt, n)?;
        let gap = nash_gap(a, &x, &y)?;
        sum_x.iter_mut().zip(x.probs()).for_each(|(s, p)| *s += p);
        sum_y.iter_mut().zip(y.probs()).for_each(|(s, p)| *s += p);
        let avg_gap = nash_gap(a, &MixedStrategy::new(sum_x.clone())?, &MixedStrategy::new(sum_y.clone())?)?;
        let residual = residual_from_operator(&w, &exact_g.expect("computed on record steps").g, eta, h);
        trace.records.push(TraceRecord { t, value, gap, avg_gap, residual, leak_row, leak_col, evals });
        history.push((x.probs().to_vec(), y.probs().to_vec()));
        last = Some((x, y, gap, leak_row, leak_col));
    }

    let (last_x, last_y, final_gap_last, final_leak_row, final_leak_col) = last.expect("final step is always recorded");
    let tail = (libm::ceil(history.len() as f64 * TAIL_FRACTION) as usize).max(1);
    let (avg_x, avg_y) = average_strategies(&history[history.len() - tail..], m, n)?;
    let final_gap_avg = nash_gap(a, &avg_x, &avg_y)?;
    let passed = final_gap_last.min(final_gap_avg) <= cfg.tolerance;
    let result = RunResult {
        final_params: w,
        last_x,
        last_y,
        avg_x,
        avg_y,
        final_gap_last,
        final_gap_avg,
        final_leak_row,
        final_leak_col,
        total_evals: evals,
        passed,
    };
    Ok((result, trace))
}

fn average_strategies(items: &[(Vec<f64>, Vec<f64>)], m: usize, n: usize) -> Result<(MixedStrategy, MixedStrategy)> {
    let mut sx = vec![0.0; m];
    let mut sy = vec![0.0; n];
    for (x, y) in items {
        sx.iter_mut().zip(x).for_each(|(s, p)| *s += p);
        sy.iter_mut().zip(y).for_each(|(s, p)| *s += p);
    }
    Ok((MixedStrategy::new(sx)?, MixedStrategy::new(sy)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{gen_dominant_row, gen_matching_pennies};

    /// Linear field `G(ω) = J ω` on two coordinates.
    struct Linear([[f64; 2]; 2]);

    impl SaddleField for Linear {
        fn dim(&self) -> usize {
            2
        }

        fn evaluate(&self, w: &JointParams, mode: ShotMode, _key: StreamKey) -> Result<GradientEstimate> {
            let v = w.as_slice();
            let g = (0..2).map(|i| self.0[i][0] * v[0] + self.0[i][1] * v[1]).collect();
            Ok(GradientEstimate { g, mode, circuit_evals: 4 })
        }
    }

    fn norm(w: &JointParams) -> f64 {
        libm::sqrt(w.as_slice().iter().map(|v| v * v).sum())
    }

    #[test]
    fn projection_examples() {
        let w = JointParams::new(&[0.5, -1.0], &[2.0]);
        assert_eq!(project_box(&w, 2.0 * PI), w);
        let w = JointParams::new(&[10.0, -10.0], &[1.0]);
        let p = project_box(&w, 2.0 * PI);
        assert_eq!(p.as_slice(), &[2.0 * PI, -2.0 * PI, 1.0]);
        assert_eq!(project_box(&p, 2.0 * PI), p);
    }

    #[test]
    fn zero_field_does_not_move() {
        let field = Linear([[0.0, 0.0], [0.0, 0.0]]);
        let w = JointParams::new(&[0.3], &[-0.7]);
        let s = eg_step(&field, &w, 0.1, 10.0, ShotMode::Exact, StreamKey::root(0)).unwrap();
        assert_eq!(s.next, w);
        assert_eq!(s.half, w);
        assert_eq!(s.circuit_evals, 8);
    }

    #[test]
    fn extragradient_contracts_where_gradient_play_spirals_out() {
        // L(θ, φ) = θφ gives G = (φ, −θ)
        let field = Linear([[0.0, 1.0], [-1.0, 0.0]]);
        let eta = 0.1;
        let mut eg = JointParams::new(&[1.0], &[1.0]);
        let mut gda = eg.clone();
        for _ in 0..100 {
            let before = norm(&eg);
            eg = eg_step(&field, &eg, eta, 1e9, ShotMode::Exact, StreamKey::root(0)).unwrap().next;
            assert!(norm(&eg) < before);

            let before = norm(&gda);
            let g = field.evaluate(&gda, ShotMode::Exact, StreamKey::root(0)).unwrap().g;
            gda = projected_move(&gda, &g, eta, 1e9).unwrap();
            assert!(norm(&gda) > before);
        }
        // closed form: each EG step scales the norm by sqrt(1 − η² + η⁴)
        let factor = libm::sqrt(1.0 - eta * eta + eta.powi(4));
        assert!((norm(&eg) - libm::sqrt(2.0) * factor.powi(100)).abs() < 1e-12);
        let factor = libm::sqrt(1.0 + eta * eta);
        assert!((norm(&gda) - libm::sqrt(2.0) * factor.powi(100)).abs() < 1e-9);
    }

    #[test]
    fn boundary_point_stays_on_boundary() {
        let field = Linear([[1.0, 0.0], [0.0, 0.0]]);
        let w = JointParams::new(&[1.0], &[0.0]);
        let s = eg_step(&field, &w, 0.5, 1.0, ShotMode::Exact, StreamKey::root(0)).unwrap();
        assert_eq!(s.next.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn residual_examples() {
        let zero = Linear([[0.0, 0.0], [0.0, 0.0]]);
        let w = JointParams::new(&[0.2], &[0.1]);
        assert_eq!(projected_residual(&zero, &w, 0.1, 1.0).unwrap(), 0.0);

        // interior, no clamping: residual is ‖G‖
        let field = Linear([[0.0, 1.0], [-1.0, 0.0]]);
        let w = JointParams::new(&[0.2], &[0.3]);
        let r = projected_residual(&field, &w, 0.1, 10.0).unwrap();
        assert!((r - libm::sqrt(0.13)).abs() < 1e-15);

        // on the boundary with G = (1, 0.5) pointing out through θ = h
        let field = Linear([[1.0, 0.0], [0.0, 0.5]]);
        let w = JointParams::new(&[1.0], &[1.0]);
        let r = projected_residual(&field, &w, 0.1, 1.0).unwrap();
        assert!((r - 0.0).abs() < 1e-15);
        let w = JointParams::new(&[1.0], &[0.5]);
        let r = projected_residual(&field, &w, 0.1, 1.0).unwrap();
        let g_norm = libm::sqrt(1.0 + 0.0625);
        assert!((r - 0.25).abs() < 1e-12 && r < g_norm);
    }

    #[test]
    fn config_validation() {
        assert!(EgConfig::default().validate().is_ok());
        for cfg in [
            EgConfig { steps: 0, ..EgConfig::default() },
            EgConfig { eta: 0.0, ..EgConfig::default() },
            EgConfig { eta: f64::NAN, ..EgConfig::default() },
            EgConfig { box_halfwidth: -1.0, ..EgConfig::default() },
            EgConfig { layers_row: 0, ..EgConfig::default() },
            EgConfig { record_every: 0, ..EgConfig::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
        assert_eq!(EgConfig::for_size(8).layers_row, 3);
        assert_eq!(EgConfig::for_size(16).layers_col, 4);
    }

    #[test]
    fn short_run_bookkeeping() {
        let a = gen_dominant_row(3, 4).unwrap().matrix;
        let cfg = EgConfig { steps: 25, record_every: 4, ..EgConfig::for_size(3) };
        let (res, trace) = run(&a, &cfg).unwrap();
        let ts: Vec<usize> = trace.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 4, 8, 12, 16, 20, 24]);
        let d = 2 * (2 * 2 * 3) as u64;
        for (k, r) in trace.records.iter().enumerate() {
            assert_eq!(r.evals, 4 * d * (r.t as u64 + 1) + 2 * (k as u64 + 1));
            assert!(r.gap >= 0.0 && (0.0..=1.0).contains(&r.leak_row) && (0.0..=1.0).contains(&r.leak_col));
        }
        assert_eq!(res.total_evals, trace.records.last().unwrap().evals);
        assert!(res.final_params.as_slice().iter().all(|v| v.abs() <= cfg.box_halfwidth));
        assert_eq!(res.passed, res.best_gap() <= PASS_TOLERANCE);
        assert_eq!(res.last_x.len(), 3);
    }

    #[test]
    fn runs_are_deterministic() {
        let a = gen_matching_pennies(2).unwrap().matrix;
        let cfg = EgConfig { steps: 30, shots: ShotMode::shots(32).unwrap(), seed: 9, ..EgConfig::for_size(2) };
        let (r1, t1) = run(&a, &cfg).unwrap();
        let (r2, t2) = run(&a, &cfg).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(r1, r2);
        let (_, t3) = run(&a, &EgConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(t1, t3);
    }

    #[test]
    fn rejects_trivial_games() {
        let a = PayoffMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(run(&a, &EgConfig::default()).is_err());
    }
}
