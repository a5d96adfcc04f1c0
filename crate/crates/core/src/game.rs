//! Matrix games, mixed strategies and equilibrium certificates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{check_dim, invalid, Error, Result};
use crate::rng::StreamKey;

/// Components more negative than this are rejected rather than clamped.
const NEGATIVE_SLACK: f64 = 1e-9;

/// Payoff matrix of a two-player zero-sum game, row player maximizing.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("payoff matrix needs at least one row and one column"));
        }
        check_dim(rows * cols, entries.len())?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(invalid("payoff entries must be finite"));
        }
        Ok(PayoffMatrix { rows, cols, entries })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(m * n);
        for r in rows {
            check_dim(n, r.as_ref().len())?;
            entries.extend_from_slice(r.as_ref());
        }
        Self::new(m, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// `‖A‖_∞ = max |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `A y`, the row player's payoff per pure action against `y`.
    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }

    /// `xᵀ A`, the payoff per pure column action against `x`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> PayoffMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j));
            }
        }
        PayoffMatrix { rows: self.cols, cols: self.rows, entries }
    }

    /// Adds `k` to every entry.
    pub fn shifted(&self, k: f64) -> PayoffMatrix {
        PayoffMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|v| v + k).collect() }
    }

    /// Negated transpose: the same game seen from the column player.
    pub fn negated_transpose(&self) -> PayoffMatrix {
        let t = self.transpose();
        PayoffMatrix { entries: t.entries.iter().map(|v| -v).collect(), ..t }
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Validates and renormalizes `probs`. Tiny negative round-off is clamped
    /// to zero; genuinely negative or non-finite components are rejected.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("a mixed strategy needs at least one action"));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -NEGATIVE_SLACK {
                return Err(invalid(format!("invalid probability component {p}")));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(invalid("probabilities sum to zero"));
        }
        if total != 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(MixedStrategy { probs })
    }

    pub fn pure(len: usize, action: usize) -> Result<Self> {
        if action >= len {
            return Err(invalid(format!("action {action} out of range for {len} actions")));
        }
        let mut probs = vec![0.0; len];
        probs[action] = 1.0;
        Ok(MixedStrategy { probs })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("a mixed strategy needs at least one action"));
        }
        Ok(MixedStrategy { probs: vec![1.0 / len as f64; len] })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Indices carrying probability above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.probs.iter().enumerate().filter(|(_, p)| **p > tol).map(|(i, _)| i).collect()
    }
}

fn check_profile(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<()> {
    check_dim(a.rows(), x.len())?;
    check_dim(a.cols(), y.len())
}

/// Expected payoff `xᵀ A y` to the row player.
pub fn payoff(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
    check_profile(a, x, y)?;
    Ok(dot(x.probs(), &a.mul_vec(y.probs())))
}

/// Unilateral deviation gains `(δ_row, δ_col)`.
///
/// `δ_row = max_i (Ay)_i − xᵀAy` and `δ_col = xᵀAy − min_j (xᵀA)_j`; both are
/// clamped at zero against round-off.
pub fn deviation_gains(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<(f64, f64)> {
    check_profile(a, x, y)?;
    let ay = a.mul_vec(y.probs());
    let value = dot(x.probs(), &ay);
    let alpha = max_of(&ay);
    let beta = min_of(&a.vec_mul(x.probs()));
    Ok(((alpha - value).max(0.0), (value - beta).max(0.0)))
}

/// Nash gap `max_i (Ay)_i − min_j (xᵀA)_j`; zero exactly at equilibrium.
pub fn nash_gap(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
    check_profile(a, x, y)?;
    let alpha = max_of(&a.mul_vec(y.probs()));
    let beta = min_of(&a.vec_mul(x.probs()));
    Ok((alpha - beta).max(0.0))
}

/// Best-response values `(α(y), β(x))`. Weak duality gives `β(x) ≤ v* ≤ α(y)`.
pub fn best_response_values(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<(f64, f64)> {
    check_profile(a, x, y)?;
    Ok((max_of(&a.mul_vec(y.probs())), min_of(&a.vec_mul(x.probs()))))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Smallest power of two that is `≥ k`.
pub fn padded_dim(k: usize) -> usize {
    k.next_power_of_two()
}

/// A game padded to power-of-two dimensions with strictly dominated dummy
/// actions: dummy rows pay `−C`, dummy columns pay `+C`, and the dummy/dummy
/// block is zero, with `C > ‖A‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGame {
    matrix: PayoffMatrix,
    orig_rows: usize,
    orig_cols: usize,
    dominance: f64,
}

impl EmbeddedGame {
    /// The padded matrix `Ã`.
    pub fn matrix(&self) -> &PayoffMatrix {
        &self.matrix
    }

    pub fn orig_rows(&self) -> usize {
        self.orig_rows
    }

    pub fn orig_cols(&self) -> usize {
        self.orig_cols
    }

    pub fn padded_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn padded_cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Dominance constant `C`.
    pub fn dominance(&self) -> f64 {
        self.dominance
    }

    pub fn is_padded(&self) -> bool {
        self.padded_rows() != self.orig_rows || self.padded_cols() != self.orig_cols
    }
}

/// Default margin added to `‖A‖_∞` to form the dominance constant.
pub const DEFAULT_C_MARGIN: f64 = 1.0;

/// Embeds `a` into power-of-two dimensions with `C = ‖A‖_∞ + c_margin`.
pub fn embed_dominated(a: &PayoffMatrix, c_margin: f64) -> Result<EmbeddedGame> {
    if !c_margin.is_finite() || c_margin <= 0.0 {
        return Err(invalid("dominance margin must be positive and finite"));
    }
    let (m, n) = (a.rows(), a.cols());
    let (big_m, big_n) = (padded_dim(m), padded_dim(n));
    let c = a.max_abs() + c_margin;
    let mut entries = Vec::with_capacity(big_m * big_n);
    for i in 0..big_m {
        for j in 0..big_n {
            entries.push(match (i < m, j < n) {
                (true, true) => a.get(i, j),
                (false, true) => -c,
                (true, false) => c,
                (false, false) => 0.0,
            });
        }
    }
    Ok(EmbeddedGame { matrix: PayoffMatrix::new(big_m, big_n, entries)?, orig_rows: m, orig_cols: n, dominance: c })
}

/// Restricts a padded strategy to its first `m` actions.
///
/// Returns the renormalized restriction and the leakage, i.e. the mass the
/// padded strategy places on dummy actions.
pub fn restrict_strategy(xt: &MixedStrategy, m: usize) -> Result<(MixedStrategy, f64)> {
    if m == 0 || m > xt.len() {
        return Err(invalid(format!("cannot restrict {} actions to {m}", xt.len())));
    }
    let (head, tail) = xt.probs().split_at(m);
    let leakage = tail.iter().fold(0.0, |s, p| s + p);
    let kept: f64 = head.iter().sum();
    if kept <= 0.0 {
        return Err(Error::DegenerateStrategy);
    }
    let x = MixedStrategy { probs: head.iter().map(|p| p / kept).collect() };
    Ok((x, leakage))
}

/// Appends zeros so `x` lives on `big` actions.
pub fn extend_strategy(x: &MixedStrategy, big: usize) -> Result<MixedStrategy> {
    if big < x.len() {
        return Err(invalid(format!("cannot extend {} actions to {big}", x.len())));
    }
    let mut probs = x.probs.clone();
    probs.resize(big, 0.0);
    Ok(MixedStrategy { probs })
}

/// Instance classes used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameKind {
    DominantRow,
    MatchingPennies,
    Random,
}

impl GameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::DominantRow => "dominant",
            GameKind::MatchingPennies => "pennies",
            GameKind::Random => "random",
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            GameKind::DominantRow => 1,
            GameKind::MatchingPennies => 2,
            GameKind::Random => 3,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dominant" => Ok(GameKind::DominantRow),
            "pennies" => Ok(GameKind::MatchingPennies),
            "random" => Ok(GameKind::Random),
            other => Err(invalid(format!("unknown game kind `{other}` (expected dominant, pennies or random)"))),
        }
    }
}

/// A generated game together with the recipe that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    pub matrix: PayoffMatrix,
    pub kind: GameKind,
    pub seed: u64,
    pub label: String,
}

impl GameInstance {
    /// Regenerates an instance from its recipe. `seed` is ignored for
    /// matching pennies.
    pub fn generate(kind: GameKind, size: usize, seed: u64) -> Result<Self> {
        match kind {
            GameKind::DominantRow => gen_dominant_row(size, seed),
            GameKind::MatchingPennies => gen_matching_pennies(size),
            GameKind::Random => gen_random(size, seed),
        }
    }
}

fn check_size(size: usize) -> Result<()> {
    if size < 2 {
        return Err(invalid(format!("instance size must be at least 2, got {size}")));
    }
    Ok(())
}

fn instance(kind: GameKind, size: usize, seed: u64, entries: Vec<f64>) -> Result<GameInstance> {
    Ok(GameInstance {
        matrix: PayoffMatrix::new(size, size, entries)?,
        kind,
        seed,
        label: format!("{kind}-{size}x{size}-s{seed}"),
    })
}

/// Square game whose last row strictly dominates every other row column by
/// column, so `(last row, argmin of last row)` is a pure equilibrium.
pub fn gen_dominant_row(size: usize, seed: u64) -> Result<GameInstance> {
    check_size(size)?;
    let mut rng = StreamKey::root(seed).child(GameKind::DominantRow.stream_tag()).rng();
    let mut entries: Vec<f64> = (0..(size - 1) * size).map(|_| rng.random_range(-1.0..=1.0)).collect();
    for j in 0..size {
        let col_max = (0..size - 1).map(|i| entries[i * size + j]).fold(f64::NEG_INFINITY, f64::max);
        let margin: f64 = rng.random_range(0.05..=0.2);
        entries.push(col_max + margin);
    }
    instance(GameKind::DominantRow, size, seed, entries)
}

/// Generalized matching pennies: `+1` on the diagonal, `−1` elsewhere. The
/// uniform profile is the equilibrium, with value `(2 − n)/n`.
pub fn gen_matching_pennies(size: usize) -> Result<GameInstance> {
    check_size(size)?;
    let entries = (0..size * size).map(|k| if k / size == k % size { 1.0 } else { -1.0 }).collect();
    instance(GameKind::MatchingPennies, size, 0, entries)
}

/// Square game with entries uniform in `[−1, 1]`.
pub fn gen_random(size: usize, seed: u64) -> Result<GameInstance> {
    check_size(size)?;
    let mut rng = StreamKey::root(seed).child(GameKind::Random.stream_tag()).rng();
    let entries = (0..size * size).map(|_| rng.random_range(-1.0..=1.0)).collect();
    instance(GameKind::Random, size, seed, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pennies() -> PayoffMatrix {
        PayoffMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap()
    }

    fn strat(p: &[f64]) -> MixedStrategy {
        MixedStrategy::new(p.to_vec()).unwrap()
    }

    #[test]
    fn payoff_examples() {
        let a = pennies();
        assert_eq!(payoff(&a, &strat(&[0.5, 0.5]), &strat(&[0.5, 0.5])).unwrap(), 0.0);
        assert_eq!(payoff(&a, &strat(&[1.0, 0.0]), &strat(&[0.0, 1.0])).unwrap(), -1.0);
        let b = PayoffMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let v = payoff(&b, &MixedStrategy::pure(2, i).unwrap(), &MixedStrategy::pure(3, j).unwrap()).unwrap();
                assert_eq!(v, b.get(i, j));
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = pennies();
        let err = payoff(&a, &strat(&[1.0, 0.0, 0.0]), &strat(&[0.5, 0.5])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
        assert!(nash_gap(&a, &strat(&[1.0, 0.0]), &strat(&[1.0])).is_err());
        assert!(deviation_gains(&a, &strat(&[1.0]), &strat(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn deviation_gains_and_gap_on_pennies() {
        let a = pennies();
        let u = strat(&[0.5, 0.5]);
        assert_eq!(deviation_gains(&a, &u, &u).unwrap(), (0.0, 0.0));
        assert_eq!(nash_gap(&a, &u, &u).unwrap(), 0.0);
        let e1 = strat(&[1.0, 0.0]);
        assert_eq!(deviation_gains(&a, &e1, &e1).unwrap(), (0.0, 2.0));
        assert_eq!(nash_gap(&a, &e1, &e1).unwrap(), 2.0);
    }

    #[test]
    fn strategy_construction_renormalizes() {
        let s = MixedStrategy::new(vec![2.0, 2.0]).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.5]);
        let s = MixedStrategy::new(vec![1.0, -1e-15]).unwrap();
        assert_eq!(s.probs(), &[1.0, 0.0]);
        assert!(MixedStrategy::new(vec![1.0, -0.1]).is_err());
        assert!(MixedStrategy::new(vec![0.0, 0.0]).is_err());
        assert!(MixedStrategy::new(vec![f64::NAN]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
    }

    #[test]
    fn matrix_rejects_bad_shapes() {
        assert!(PayoffMatrix::new(0, 1, vec![]).is_err());
        assert!(PayoffMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(PayoffMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(PayoffMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn embedding_of_power_of_two_game_is_identity() {
        let a = gen_random(4, 3).unwrap().matrix;
        let e = embed_dominated(&a, 1.0).unwrap();
        assert_eq!(e.matrix(), &a);
        assert_eq!((e.padded_rows(), e.padded_cols()), (4, 4));
        assert!(!e.is_padded());
        assert_eq!(e.dominance(), a.max_abs() + 1.0);
    }

    #[test]
    fn embedding_three_by_two() {
        let a = PayoffMatrix::from_rows(&[[1.0, -1.0], [0.5, 0.0], [-0.25, 1.0]]).unwrap();
        let e = embed_dominated(&a, 1.0).unwrap();
        assert_eq!((e.padded_rows(), e.padded_cols()), (4, 2));
        assert_eq!(e.matrix().row(3), &[-2.0, -2.0]);
        for i in 0..3 {
            assert_eq!(e.matrix().row(i), a.row(i));
        }
    }

    #[test]
    fn embedding_three_by_three_block_pattern() {
        let a = gen_random(3, 11).unwrap().matrix;
        let e = embed_dominated(&a, 0.5).unwrap();
        let c = a.max_abs() + 0.5;
        let t = e.matrix();
        assert_eq!((t.rows(), t.cols()), (4, 4));
        for i in 0..4 {
            for j in 0..4 {
                let expect = match (i < 3, j < 3) {
                    (true, true) => a.get(i, j),
                    (false, true) => -c,
                    (true, false) => c,
                    (false, false) => 0.0,
                };
                assert_eq!(t.get(i, j), expect);
            }
        }
        assert!(embed_dominated(&a, 0.0).is_err());
        assert!(embed_dominated(&a, -1.0).is_err());
    }

    #[test]
    fn restriction_and_extension() {
        let x = strat(&[0.2, 0.3, 0.5, 0.0]);
        let (r, leak) = restrict_strategy(&x, 4).unwrap();
        assert_eq!((r, leak), (x.clone(), 0.0));

        let u = MixedStrategy::uniform(4).unwrap();
        let (r, leak) = restrict_strategy(&u, 3).unwrap();
        assert_eq!(leak, 0.25);
        for p in r.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }

        let e = extend_strategy(&strat(&[1.0, 0.0]), 4).unwrap();
        assert_eq!(e.probs(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(extend_strategy(&x, 4).unwrap(), x);
        assert!(extend_strategy(&x, 3).is_err());

        let dummy = strat(&[0.0, 0.0, 1.0]);
        assert_eq!(restrict_strategy(&dummy, 2).unwrap_err(), Error::DegenerateStrategy);
        assert!(restrict_strategy(&dummy, 4).is_err());
    }

    #[test]
    fn dominant_row_generator_invariants() {
        for seed in 0..20 {
            let g = gen_dominant_row(6, seed).unwrap();
            let a = &g.matrix;
            for j in 0..6 {
                for i in 0..5 {
                    assert!(a.get(5, j) > a.get(i, j) + 0.049);
                }
            }
            assert_eq!(g, gen_dominant_row(6, seed).unwrap());
        }
        assert_ne!(gen_dominant_row(6, 0).unwrap().matrix, gen_dominant_row(6, 1).unwrap().matrix);
        assert!(gen_dominant_row(1, 0).is_err());
    }

    #[test]
    fn pennies_generator() {
        assert_eq!(gen_matching_pennies(2).unwrap().matrix, pennies());
        let a = gen_matching_pennies(5).unwrap().matrix;
        assert_eq!(a, a.transpose());
        let u = MixedStrategy::uniform(5).unwrap();
        assert!(nash_gap(&a, &u, &u).unwrap() < 1e-15);
        assert!((payoff(&a, &u, &u).unwrap() - (2.0 - 5.0) / 5.0).abs() < 1e-15);
        assert!(gen_matching_pennies(0).is_err());
    }

    #[test]
    fn random_generator() {
        let g = gen_random(8, 7).unwrap();
        assert!(g.matrix.entries().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(g.matrix, gen_random(8, 7).unwrap().matrix);
        assert_eq!(g.label, "random-8x8-s7");
        assert!(gen_random(1, 7).is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in [GameKind::DominantRow, GameKind::MatchingPennies, GameKind::Random] {
            assert_eq!(k.as_str().parse::<GameKind>().unwrap(), k);
        }
        assert!("chess".parse::<GameKind>().is_err());
    }
}
