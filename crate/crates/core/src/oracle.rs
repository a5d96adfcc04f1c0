//! Payoff and gradient oracle for circuit-parameterized strategies.
//!
//! The embedded payoff is `L(θ, φ) = ⟨x_θ, Ã y_φ⟩`, where `x_θ` and `y_φ`
//! are the Born distributions of the two players' circuits. Partial
//! derivatives come from the two-point parameter-shift rule
//! `∂_k L = ½ (L(ω + π/2 e_k) − L(ω − π/2 e_k))`, which is exact for
//! RY/RZ generators. In shot mode every shifted payoff is replaced by an
//! estimate built from `S` fresh measurement samples.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::fmt;
use core::num::NonZeroUsize;

use crate::error::{check_dim, invalid, Result};
use crate::game::{dot, EmbeddedGame, MixedStrategy};
use crate::qstate::{sample_frequencies, AnsatzSpec};
use crate::rng::StreamKey;

/// Exact expectations, or `S` shots per circuit evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotMode {
    Exact,
    Shots(NonZeroUsize),
}

impl ShotMode {
    pub fn shots(n: usize) -> Result<Self> {
        NonZeroUsize::new(n)
            .map(ShotMode::Shots)
            .ok_or_else(|| invalid("shot count must be at least 1; use exact mode for infinite shots"))
    }

    pub fn is_exact(self) -> bool {
        matches!(self, ShotMode::Exact)
    }

    pub fn count(self) -> Option<usize> {
        match self {
            ShotMode::Exact => None,
            ShotMode::Shots(s) => Some(s.get()),
        }
    }
}

impl core::str::FromStr for ShotMode {
    type Err = crate::Error;

    /// `exact` or a positive shot count.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(ShotMode::Exact);
        }
        let n: usize = s.parse().map_err(|_| invalid(format!("invalid shot count `{s}`")))?;
        ShotMode::shots(n)
    }
}

impl fmt::Display for ShotMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShotMode::Exact => f.write_str("exact"),
            ShotMode::Shots(s) => write!(f, "{s}"),
        }
    }
}

/// How the opponent's strategy enters a shot-mode estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OpponentMode {
    /// The opponent's circuit is measured with `S` fresh shots as well.
    #[default]
    Sampled,
    /// The opponent's exact Born distribution is used.
    Exact,
}

/// Joint parameter vector `ω = (θ, φ)` stored flat, row block first.
#[derive(Debug, Clone, PartialEq)]
pub struct JointParams {
    values: Vec<f64>,
    split: usize,
}

impl JointParams {
    pub fn new(theta: &[f64], phi: &[f64]) -> Self {
        let mut values = Vec::with_capacity(theta.len() + phi.len());
        values.extend_from_slice(theta);
        values.extend_from_slice(phi);
        JointParams { values, split: theta.len() }
    }

    pub fn from_flat(values: Vec<f64>, split: usize) -> Result<Self> {
        if split > values.len() {
            return Err(invalid(format!("row block {split} longer than {} parameters", values.len())));
        }
        Ok(JointParams { values, split })
    }

    pub fn zeros(row_len: usize, col_len: usize) -> Self {
        JointParams { values: alloc::vec![0.0; row_len + col_len], split: row_len }
    }

    pub fn theta(&self) -> &[f64] {
        &self.values[..self.split]
    }

    pub fn phi(&self) -> &[f64] {
        &self.values[self.split..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Length of the row block `d_r`.
    pub fn split(&self) -> usize {
        self.split
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same block layout, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        check_dim(self.values.len(), values.len())?;
        Ok(JointParams { values, split: self.split })
    }
}

/// One evaluation of the saddle operator `G(ω) = (∇_θ L, −∇_φ L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub g: Vec<f64>,
    pub mode: ShotMode,
    /// Shifted circuit evaluations spent, `2d` for a full estimate.
    pub circuit_evals: usize,
}

/// Anything that can play the role of the saddle operator in the
/// extragradient iteration.
pub trait SaddleField {
    fn dim(&self) -> usize;

    fn evaluate(&self, w: &JointParams, mode: ShotMode, key: StreamKey) -> Result<GradientEstimate>;
}

// stream tags
const TAG_ROW: u64 = 0;
const TAG_COL: u64 = 1;
const TAG_PLUS: u64 = 0;
const TAG_MINUS: u64 = 1;
const TAG_OWN: u64 = 0;
const TAG_OPP: u64 = 1;

/// Payoff oracle over an embedded game and the two players' ansätze.
#[derive(Debug, Clone)]
pub struct PayoffOracle {
    game: EmbeddedGame,
    row: AnsatzSpec,
    col: AnsatzSpec,
    opponent: OpponentMode,
}

impl PayoffOracle {
    pub fn new(game: EmbeddedGame, row: AnsatzSpec, col: AnsatzSpec) -> Result<Self> {
        check_dim(game.padded_rows(), row.outcomes())?;
        check_dim(game.padded_cols(), col.outcomes())?;
        Ok(PayoffOracle { game, row, col, opponent: OpponentMode::default() })
    }

    pub fn with_opponent_mode(mut self, opponent: OpponentMode) -> Self {
        self.opponent = opponent;
        self
    }

    pub fn game(&self) -> &EmbeddedGame {
        &self.game
    }

    pub fn row_ansatz(&self) -> AnsatzSpec {
        self.row
    }

    pub fn col_ansatz(&self) -> AnsatzSpec {
        self.col
    }

    pub fn opponent_mode(&self) -> OpponentMode {
        self.opponent
    }

    /// `d = d_r + d_c`.
    pub fn param_dim(&self) -> usize {
        self.row.param_count() + self.col.param_count()
    }

    fn check(&self, w: &JointParams) -> Result<()> {
        check_dim(self.row.param_count(), w.split())?;
        check_dim(self.col.param_count(), w.len() - w.split())
    }

    /// Padded Born strategies `(x_θ, y_φ)`.
    pub fn strategies(&self, w: &JointParams) -> Result<(MixedStrategy, MixedStrategy)> {
        self.check(w)?;
        let x = self.row.prepare(w.theta())?.born_distribution();
        let y = self.col.prepare(w.phi())?.born_distribution();
        Ok((x, y))
    }

    /// Exact `L(θ, φ)`.
    pub fn expected_payoff(&self, w: &JointParams) -> Result<f64> {
        self.check(w)?;
        let x = self.row.probabilities(w.theta())?;
        let y = self.col.probabilities(w.phi())?;
        Ok(dot(&x, &self.game.matrix().mul_vec(&y)))
    }

    /// `⟨x̂, Ã ŷ⟩` from `shots` samples of each circuit.
    pub fn estimated_payoff(&self, w: &JointParams, shots: usize, key: StreamKey) -> Result<f64> {
        self.check(w)?;
        let x = self.row.probabilities(w.theta())?;
        let y = self.col.probabilities(w.phi())?;
        let xh = sample_frequencies(&x, shots, &mut key.child(TAG_ROW).rng())?;
        let yh = sample_frequencies(&y, shots, &mut key.child(TAG_COL).rng())?;
        Ok(dot(&xh, &self.game.matrix().mul_vec(&yh)))
    }

    /// `∇_θ L` by parameter shift.
    pub fn grad_row(&self, w: &JointParams, mode: ShotMode, key: StreamKey) -> Result<Vec<f64>> {
        self.check(w)?;
        let a = self.game.matrix();
        let y = self.col.probabilities(w.phi())?;
        let ay = a.mul_vec(&y);
        let key = key.child(TAG_ROW);
        shifted_partials(w.theta(), |k, sign, shifted| {
            let x = self.row.probabilities(shifted)?;
            match mode {
                ShotMode::Exact => Ok(dot(&x, &ay)),
                ShotMode::Shots(s) => {
                    let sub = key.path(&[k as u64, sign]);
                    let xh = sample_frequencies(&x, s.get(), &mut sub.child(TAG_OWN).rng())?;
                    match self.opponent {
                        OpponentMode::Exact => Ok(dot(&xh, &ay)),
                        OpponentMode::Sampled => {
                            let yh = sample_frequencies(&y, s.get(), &mut sub.child(TAG_OPP).rng())?;
                            Ok(dot(&xh, &a.mul_vec(&yh)))
                        }
                    }
                }
            }
        })
    }

    /// `∇_φ L` by parameter shift.
    pub fn grad_col(&self, w: &JointParams, mode: ShotMode, key: StreamKey) -> Result<Vec<f64>> {
        self.check(w)?;
        let a = self.game.matrix();
        let x = self.row.probabilities(w.theta())?;
        let xa = a.vec_mul(&x);
        let key = key.child(TAG_COL);
        shifted_partials(w.phi(), |k, sign, shifted| {
            let y = self.col.probabilities(shifted)?;
            match mode {
                ShotMode::Exact => Ok(dot(&xa, &y)),
                ShotMode::Shots(s) => {
                    let sub = key.path(&[k as u64, sign]);
                    let yh = sample_frequencies(&y, s.get(), &mut sub.child(TAG_OWN).rng())?;
                    match self.opponent {
                        OpponentMode::Exact => Ok(dot(&xa, &yh)),
                        OpponentMode::Sampled => {
                            let xh = sample_frequencies(&x, s.get(), &mut sub.child(TAG_OPP).rng())?;
                            Ok(dot(&a.vec_mul(&xh), &yh))
                        }
                    }
                }
            }
        })
    }

    /// `G(ω) = (∇_θ L, −∇_φ L)`.
    pub fn saddle_operator(&self, w: &JointParams, mode: ShotMode, key: StreamKey) -> Result<GradientEstimate> {
        let mut g = self.grad_row(w, mode, key)?;
        g.extend(self.grad_col(w, mode, key)?.into_iter().map(|v| -v));
        let circuit_evals = 2 * g.len();
        Ok(GradientEstimate { g, mode, circuit_evals })
    }
}

impl SaddleField for PayoffOracle {
    fn dim(&self) -> usize {
        self.param_dim()
    }

    fn evaluate(&self, w: &JointParams, mode: ShotMode, key: StreamKey) -> Result<GradientEstimate> {
        self.saddle_operator(w, mode, key)
    }
}

/// `½ (f(p + π/2 e_k) − f(p − π/2 e_k))` for every coordinate `k`.
fn shifted_partials<F>(params: &[f64], mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, u64, &[f64]) -> Result<f64>,
{
    let mut shifted = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        shifted[k] = params[k] + FRAC_PI_2;
        let plus = f(k, TAG_PLUS, &shifted)?;
        shifted[k] = params[k] - FRAC_PI_2;
        let minus = f(k, TAG_MINUS, &shifted)?;
        shifted[k] = params[k];
        out.push(0.5 * (plus - minus));
    }
    Ok(out)
}
