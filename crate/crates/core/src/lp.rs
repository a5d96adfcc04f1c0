//! Exact equilibria of zero-sum matrix games.
//!
//! [`solve_lp`] runs a dense tableau simplex with Bland's rule on the
//! classical reduction of a zero-sum game to a linear program.
//! [`solve_support_enum`] is an independent brute-force oracle for small
//! games that enumerates square support pairs and solves the indifference
//! equations directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{payoff, MixedStrategy, PayoffMatrix};

/// Pivot and feasibility tolerance of the simplex tableau.
const FEAS_TOL: f64 = 1e-10;

/// An exact equilibrium `(x*, y*)` and the game value `v*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub x_star: MixedStrategy,
    pub y_star: MixedStrategy,
    pub value: f64,
}

/// Solves the game by linear programming.
///
/// The matrix is shifted to `B = A − min(A) + 1` so every entry is at least
/// one, and the column player's program `max 1ᵀw s.t. Bw ≤ 1, w ≥ 0` is
/// solved from the all-slack basis. Then `v(B) = 1/1ᵀw`, `y* = w·v(B)`, and
/// the row player's strategy is read off the slack reduced costs, which are
/// the optimal dual variables.
pub fn solve_lp(a: &PayoffMatrix) -> Result<ExactSolution> {
    let (m, n) = (a.rows(), a.cols());
    let shift = 1.0 - a.min_entry();
    let width = n + m + 1;
    let rhs = width - 1;

    // rows 0..m are constraints, row m is the objective row (z − 1ᵀw = 0)
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = a.get(i, j) + shift;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + rhs] = 1.0;
    }
    for j in 0..n {
        t[m * width + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (m + n) + 1000;
    let mut pivots = 0;
    // Bland: lowest-index improving column
    while let Some(enter) = (0..rhs).find(|&j| t[m * width + j] < -FEAS_TOL) {
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t[r * width + enter];
            if coef <= FEAS_TOL {
                continue;
            }
            let ratio = t[r * width + rhs] / coef;
            leave = match leave {
                None => Some((r, ratio)),
                Some((best, best_ratio)) => {
                    let tie = (ratio - best_ratio).abs() <= FEAS_TOL * best_ratio.abs().max(1.0);
                    if ratio < best_ratio && !tie || tie && basis[r] < basis[best] {
                        Some((r, ratio))
                    } else {
                        Some((best, best_ratio))
                    }
                }
            };
        }
        // The feasible region is bounded because B > 0, so a leaving row
        // always exists unless numerics broke down.
        let Some((row, _)) = leave else {
            return Err(Error::SolverFailure { iterations: pivots });
        };
        pivot(&mut t, width, m + 1, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::SolverFailure { iterations: pivots });
        }
    }

    let z = t[m * width + rhs];
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::SolverFailure { iterations: pivots });
    }
    let mut w = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            w[b] = t[r * width + rhs];
        }
    }
    let u: Vec<f64> = (0..m).map(|i| t[m * width + n + i]).collect();

    let x_star = MixedStrategy::new(u)?;
    let y_star = MixedStrategy::new(w)?;
    Ok(ExactSolution { x_star, y_star, value: 1.0 / z - shift })
}

fn pivot(t: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let (before, rest) = t.split_at_mut(row * width);
    let (prow, after) = rest.split_at_mut(width);
    for r in (0..rows).filter(|&r| r != row) {
        let target = if r < row {
            &mut before[r * width..(r + 1) * width]
        } else {
            let k = r - row - 1;
            &mut after[k * width..(k + 1) * width]
        };
        let f = target[col];
        if f != 0.0 {
            for (x, pv) in target.iter_mut().zip(prow.iter()) {
                *x -= f * pv;
            }
            target[col] = 0.0;
        }
    }
}

/// Largest dimension accepted by [`solve_support_enum`].
pub const SUPPORT_ENUM_MAX: usize = 5;

/// Brute-force equilibrium by support enumeration.
///
/// Every zero-sum game has an equilibrium whose supports have equal size and
/// index a nonsingular square submatrix, so enumerating square support pairs
/// and solving both indifference systems is exhaustive.
pub fn solve_support_enum(a: &PayoffMatrix) -> Result<ExactSolution> {
    let (m, n) = (a.rows(), a.cols());
    if m > SUPPORT_ENUM_MAX || n > SUPPORT_ENUM_MAX {
        return Err(Error::UnsupportedSize { m, n });
    }
    let tol = 1e-9 * a.max_abs().max(1.0);
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                if let Some(sol) = try_support(a, &rows, &cols, tol) {
                    return Ok(sol);
                }
            }
        }
    }
    // unreachable for finite games; report as a solver failure
    Err(Error::SolverFailure { iterations: 0 })
}

fn try_support(a: &PayoffMatrix, rows: &[usize], cols: &[usize], tol: f64) -> Option<ExactSolution> {
    let k = rows.len();
    let dim = k + 1;
    // x-system: Σ_i x_i A_ij − v = 0 (j ∈ cols), Σ x_i = 1
    let mut mx = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for (e, &j) in cols.iter().enumerate() {
        for (u, &i) in rows.iter().enumerate() {
            mx[e * dim + u] = a.get(i, j);
        }
        mx[e * dim + k] = -1.0;
    }
    for u in 0..k {
        mx[k * dim + u] = 1.0;
    }
    rhs[k] = 1.0;
    let xs = solve_linear(mx, rhs.clone(), dim)?;

    let mut my = vec![0.0; dim * dim];
    for (e, &i) in rows.iter().enumerate() {
        for (u, &j) in cols.iter().enumerate() {
            my[e * dim + u] = a.get(i, j);
        }
        my[e * dim + k] = -1.0;
    }
    for u in 0..k {
        my[k * dim + u] = 1.0;
    }
    let ys = solve_linear(my, rhs, dim)?;

    let (vx, vy) = (xs[k], ys[k]);
    if (vx - vy).abs() > tol || xs[..k].iter().chain(&ys[..k]).any(|&p| p < -tol) {
        return None;
    }
    let mut x = vec![0.0; a.rows()];
    for (u, &i) in rows.iter().enumerate() {
        x[i] = xs[u];
    }
    let mut y = vec![0.0; a.cols()];
    for (u, &j) in cols.iter().enumerate() {
        y[j] = ys[u];
    }
    let x = MixedStrategy::new(x).ok()?;
    let y = MixedStrategy::new(y).ok()?;
    let ay = a.mul_vec(y.probs());
    let xa = a.vec_mul(x.probs());
    if ay.iter().any(|&r| r > vy + tol) || xa.iter().any(|&c| c < vx - tol) {
        return None;
    }
    let value = payoff(a, &x, &y).ok()?;
    Some(ExactSolution { x_star: x, y_star: y, value })
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_linear(mut mat: Vec<f64>, mut rhs: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = mat.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&r1, &r2| mat[r1 * n + col].abs().total_cmp(&mat[r2 * n + col].abs()))?;
        if mat[piv * n + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for c in 0..n {
                mat.swap(piv * n + c, col * n + c);
            }
            rhs.swap(piv, col);
        }
        for r in col + 1..n {
            let f = mat[r * n + col] / mat[col * n + col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                mat[r * n + c] -= f * mat[col * n + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut sol = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| mat[r * n + c] * sol[c]).sum();
        sol[r] = (rhs[r] - tail) / mat[r * n + r];
    }
    Some(sol)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n)
        .filter(move |mask| mask.count_ones() as usize == k)
        .map(move |mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
}
