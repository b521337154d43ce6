//! Zero-sum games on binary payoff matrices.
//!
//! The row player receives `M(r, j)` and maximizes; the column player
//! minimizes. Solutions are certified by exploitability: the larger of the two
//! players' gains from switching to a best response, computed exactly by
//! enumerating pure strategies.

use serde::Serialize;

use crate::approx::{sparsify_rows, ApproxConfig, Multiset, ProbabilityVector};
use crate::bits::BitRow;
use crate::concept::{parse_rows, ConceptClass};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayoffMatrix {
    rows: Vec<BitRow>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<BitRow>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || cols == 0 {
            return Err(Error::domain("payoff matrix must have positive dimensions"));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("payoff matrix rows differ in length"));
        }
        Ok(PayoffMatrix { rows })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        PayoffMatrix::new(
            (0..rows)
                .map(|r| BitRow::from_bools((0..cols).map(|j| f(r, j))))
                .collect(),
        )
    }

    /// Same text format as concept classes; repeated rows are allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let (_, rows) = parse_rows(text, true)?;
        PayoffMatrix::new(rows.into_iter().map(|(_, r)| r).collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.cols(), self.rows());
        for r in &self.rows {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.rows[0].len()
    }

    #[inline]
    pub fn get(&self, r: usize, j: usize) -> bool {
        self.rows[r].get(j)
    }

    pub fn row_bits(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn transpose(&self) -> PayoffMatrix {
        PayoffMatrix {
            rows: (0..self.cols())
                .map(|j| BitRow::from_bools(self.rows.iter().map(|r| r.get(j))))
                .collect(),
        }
    }

    /// Rows viewed as concepts over the column set (duplicates dropped).
    pub fn row_class(&self) -> ConceptClass {
        ConceptClass::from_rows_dedup(self.cols(), self.rows.clone()).expect("nonempty matrix")
    }

    /// Columns viewed as concepts over the row set (duplicates dropped).
    pub fn col_class(&self) -> ConceptClass {
        self.transpose().row_class()
    }

    /// `(M q)_r` for every row.
    pub fn row_payoffs(&self, q: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| q.iter().enumerate().filter(|&(j, _)| row.get(j)).map(|(_, w)| w).sum())
            .collect()
    }

    /// `(p^T M)_j` for every column.
    pub fn col_payoffs(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for (row, &w) in self.rows.iter().zip(p) {
            if w == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                if row.get(j) {
                    *o += w;
                }
            }
        }
        out
    }

    fn dense(&self) -> Vec<f64> {
        let n = self.cols();
        let mut out = vec![0.0; self.rows() * n];
        for (r, row) in self.rows.iter().enumerate() {
            for j in 0..n {
                if row.get(j) {
                    out[r * n + j] = 1.0;
                }
            }
        }
        out
    }
}

/// Which player is choosing a best response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// The row player, responding to a column strategy.
    Row,
    /// The column player, responding to a row strategy.
    Col,
}

/// Best pure response to a mixed strategy of the opponent. Ties go to the
/// lowest index.
pub fn best_response(m: &PayoffMatrix, strategy: &ProbabilityVector, side: Side) -> Result<(usize, f64)> {
    match side {
        Side::Row => {
            if strategy.len() != m.cols() {
                return Err(Error::domain(format!(
                    "column strategy of length {} for {} columns",
                    strategy.len(),
                    m.cols()
                )));
            }
            Ok(argbest(&m.row_payoffs(strategy.weights()), |a, b| a > b))
        }
        Side::Col => {
            if strategy.len() != m.rows() {
                return Err(Error::domain(format!(
                    "row strategy of length {} for {} rows",
                    strategy.len(),
                    m.rows()
                )));
            }
            Ok(argbest(&m.col_payoffs(strategy.weights()), |a, b| a < b))
        }
    }
}

fn argbest(values: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, best.1) {
            best = (i, v);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameSolution {
    pub row_strategy: ProbabilityVector,
    pub col_strategy: ProbabilityVector,
    /// `p^T M q`.
    pub value_estimate: f64,
    /// Payoff the row strategy guarantees: `min_j (p^T M)_j`. A lower bound on the value.
    pub lower_value: f64,
    /// Payoff the column strategy concedes at most: `max_r (M q)_r`. An upper bound on the value.
    pub upper_value: f64,
    pub exploitability: f64,
    /// Iterations used by the iterative solver (0 for the exact solver).
    pub iterations: usize,
}

impl GameSolution {
    /// Scores a strategy pair by enumerating both players' pure responses.
    pub fn evaluate(m: &PayoffMatrix, p: ProbabilityVector, q: ProbabilityVector, iterations: usize) -> Self {
        let (_, upper) = best_response(m, &q, Side::Row).expect("dimensions checked by caller");
        let (_, lower) = best_response(m, &p, Side::Col).expect("dimensions checked by caller");
        let value: f64 = m
            .row_payoffs(q.weights())
            .iter()
            .zip(p.weights())
            .map(|(a, b)| a * b)
            .sum();
        let exploitability = (upper - value).max(value - lower).max(0.0);
        GameSolution {
            row_strategy: p,
            col_strategy: q,
            value_estimate: value,
            lower_value: lower,
            upper_value: upper,
            exploitability,
            iterations,
        }
    }

    pub fn duality_gap(&self) -> f64 {
        (self.upper_value - self.lower_value).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameConfig {
    /// Largest `rows * cols` accepted by the exact solver.
    pub exact_cap: usize,
    pub max_iterations: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            exact_cap: 4096,
            max_iterations: 1_000_000,
        }
    }
}

const PIVOT_EPS: f64 = 1e-11;

/// Exact minimax solution by the simplex method.
///
/// With `A = M + 1` (so the value is positive) the column player's problem is
/// `max sum(y)` subject to `A y <= 1, y >= 0`, which starts feasible at the
/// origin. At the optimum `sum(y) = 1 / value(A)`, `q = y * value(A)`, and the
/// row strategy is read off the slack columns of the objective row.
pub fn solve_exact(m: &PayoffMatrix, config: &GameConfig) -> Result<GameSolution> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows * cols > config.exact_cap {
        return Err(Error::ExactCapExceeded {
            rows,
            cols,
            cap: config.exact_cap,
        });
    }
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut tab = vec![0.0f64; (rows + 1) * width];
    for r in 0..rows {
        for j in 0..cols {
            tab[r * width + j] = if m.get(r, j) { 2.0 } else { 1.0 };
        }
        tab[r * width + cols + r] = 1.0;
        tab[r * width + rhs] = 1.0;
    }
    let obj = rows * width;
    for j in 0..cols {
        tab[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Bland's rule: cannot cycle on degenerate pivots.
    while let Some(enter) = (0..cols + rows).find(|&j| tab[obj + j] < -PIVOT_EPS) {
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = tab[r * width + enter];
            if a > PIVOT_EPS {
                let ratio = tab[r * width + rhs] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - PIVOT_EPS || (ratio <= lratio + PIVOT_EPS && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // A y <= 1 with A >= 1 bounds every variable, so some row always qualifies.
        let (pr, _) = leave.expect("bounded LP");
        let pivot = tab[pr * width + enter];
        for k in 0..width {
            tab[pr * width + k] /= pivot;
        }
        for r in 0..=rows {
            if r == pr {
                continue;
            }
            let f = tab[r * width + enter];
            if f != 0.0 {
                for k in 0..width {
                    tab[r * width + k] -= f * tab[pr * width + k];
                }
            }
        }
        basis[pr] = enter;
    }

    let mut y = vec![0.0; cols];
    for (r, &b) in basis.iter().enumerate() {
        if b < cols {
            y[b] = tab[r * width + rhs].max(0.0);
        }
    }
    let x: Vec<f64> = (0..rows).map(|r| tab[obj + cols + r].max(0.0)).collect();
    let q = ProbabilityVector::normalized(y)?;
    let p = ProbabilityVector::normalized(x)?;
    Ok(GameSolution::evaluate(m, p, q, 0))
}

/// Approximate solution by multiplicative weights.
///
/// The row player runs exponential weights with rate `sqrt(ln(m) / T)`
/// against best-responding columns; the averaged row iterate and the empirical
/// column frequencies form the answer. The horizon `T` doubles until the
/// certified exploitability reaches the target.
pub fn solve_mw(m: &PayoffMatrix, target_exploitability: f64, config: &GameConfig) -> Result<GameSolution> {
    if target_exploitability.is_nan() || target_exploitability <= 0.0 {
        return Err(Error::domain("target exploitability must be positive"));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let dense = m.dense();
    let ln_m = (rows as f64).ln();
    // regret of the averaged play is about 1.125 * sqrt(ln m / T)
    let mut horizon = ((1.27 * ln_m / (target_exploitability * target_exploitability)).ceil() as usize).max(1);
    let mut last = f64::INFINITY;
    loop {
        let horizon_now = horizon.min(config.max_iterations);
        let eta = (ln_m / horizon_now as f64).sqrt();
        let mut gains = vec![0.0f64; rows];
        let mut p_sum = vec![0.0f64; rows];
        let mut col_counts = vec![0usize; cols];
        let mut p = vec![0.0f64; rows];
        let mut col_vals = vec![0.0f64; cols];
        for _ in 0..horizon_now {
            let gmax = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (pr, g) in p.iter_mut().zip(&gains) {
                *pr = (eta * (g - gmax)).exp();
                total += *pr;
            }
            col_vals.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..rows {
                let w = p[r] / total;
                p[r] = w;
                p_sum[r] += w;
                let row = &dense[r * cols..(r + 1) * cols];
                for (v, a) in col_vals.iter_mut().zip(row) {
                    *v += w * a;
                }
            }
            let (j, _) = argbest(&col_vals, |a, b| a < b);
            col_counts[j] += 1;
            for (r, g) in gains.iter_mut().enumerate() {
                *g += dense[r * cols + j];
            }
        }
        let p_bar = ProbabilityVector::normalized(p_sum)?;
        let q_bar = ProbabilityVector::normalized(col_counts.iter().map(|&c| c as f64).collect())?;
        let sol = GameSolution::evaluate(m, p_bar, q_bar, horizon_now);
        if sol.exploitability <= target_exploitability {
            return Ok(sol);
        }
        last = last.min(sol.exploitability);
        if horizon_now >= config.max_iterations {
            return Err(Error::Convergence {
                iterations: horizon_now,
                exploitability: last,
            });
        }
        horizon *= 2;
    }
}

/// Exact solver when the matrix fits under the cap, otherwise multiplicative
/// weights to `target_exploitability`.
pub fn solve(m: &PayoffMatrix, target_exploitability: f64, config: &GameConfig) -> Result<GameSolution> {
    if m.rows() * m.cols() <= config.exact_cap {
        solve_exact(m, config)
    } else {
        solve_mw(m, target_exploitability, config)
    }
}

/// A matrix with duplicate rows and columns removed, plus the lowest original
/// index of every surviving row and column.
pub(crate) struct Reduced {
    pub matrix: PayoffMatrix,
    pub row_rep: Vec<usize>,
    pub col_rep: Vec<usize>,
}

pub(crate) fn dedup_indices(rows: &[BitRow]) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    (0..rows.len()).filter(|&i| seen.insert(&rows[i])).collect()
}

pub(crate) fn reduce(m: &PayoffMatrix) -> Reduced {
    let row_rep = dedup_indices(&m.rows);
    let t = m.transpose();
    let col_rep = dedup_indices(&t.rows);
    let matrix =
        PayoffMatrix::from_fn(row_rep.len(), col_rep.len(), |r, j| m.get(row_rep[r], col_rep[j])).expect("nonempty");
    Reduced {
        matrix,
        row_rep,
        col_rep,
    }
}

/// Uniform play over small multisets of pure strategies, certified to be
/// within `epsilon` of the game value against every pure response.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseEquilibrium {
    pub row_multiset: Multiset,
    pub col_multiset: Multiset,
    pub epsilon: f64,
    /// `max(upper_value - row_guarantee, col_guarantee - lower_value, 0)`.
    pub certified_exploitability: f64,
    /// Bounds on the game value taken from the solved game.
    pub lower_value: f64,
    pub upper_value: f64,
    /// Worst column payoff against uniform play over the row multiset.
    pub row_guarantee: f64,
    /// Best row payoff against uniform play over the column multiset.
    pub col_guarantee: f64,
    /// VC dimension of the rows as concepts over the columns.
    pub row_vc: usize,
    /// VC dimension of the columns as concepts over the rows.
    pub col_vc: usize,
    /// Size ceiling for the row multiset; governed by `col_vc`.
    pub row_ceiling: usize,
    /// Size ceiling for the column multiset; governed by `row_vc`.
    pub col_ceiling: usize,
}

fn uniform_guarantees(m: &PayoffMatrix, rows: &Multiset, cols: &Multiset) -> (f64, f64) {
    let rn = rows.size() as f64;
    let row_guarantee = (0..m.cols())
        .map(|j| {
            rows.entries()
                .iter()
                .filter(|&&(r, _)| m.get(r, j))
                .map(|&(_, c)| c)
                .sum::<usize>() as f64
                / rn
        })
        .fold(f64::INFINITY, f64::min);
    let cn = cols.size() as f64;
    let col_guarantee = (0..m.rows())
        .map(|r| {
            cols.entries()
                .iter()
                .filter(|&&(j, _)| m.get(r, j))
                .map(|&(_, c)| c)
                .sum::<usize>() as f64
                / cn
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (row_guarantee, col_guarantee)
}

impl SparseEquilibrium {
    /// Recomputes the certificate from the multisets alone.
    pub fn verify(&self, m: &PayoffMatrix) -> bool {
        let in_range = self.row_multiset.entries().iter().all(|&(r, _)| r < m.rows())
            && self.col_multiset.entries().iter().all(|&(j, _)| j < m.cols())
            && self.row_multiset.size() > 0
            && self.col_multiset.size() > 0;
        if !in_range {
            return false;
        }
        let (rg, cg) = uniform_guarantees(m, &self.row_multiset, &self.col_multiset);
        let cert = (self.upper_value - rg).max(cg - self.lower_value).max(0.0);
        rg == self.row_guarantee
            && cg == self.col_guarantee
            && cert == self.certified_exploitability
            && cert <= self.epsilon
    }
}

/// Sparse ε-Nash equilibrium.
///
/// Duplicate rows and columns are collapsed, the reduced game is solved, and
/// each side's mixed strategy is sparsified against the other side's pure
/// strategies. The sparsification tolerance is shrunk by the solver's duality
/// gap so the certificate holds against the true value.
pub fn sparse_epsilon_nash(
    m: &PayoffMatrix,
    epsilon: f64,
    seed: u64,
    game: &GameConfig,
    approx: &ApproxConfig,
) -> Result<SparseEquilibrium> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let reduced = reduce(m);
    let sol = solve(&reduced.matrix, epsilon / 4.0, game)?;
    let accept = epsilon - sol.duality_gap();
    if accept <= 0.0 {
        return Err(Error::domain("solver gap leaves no room for sparsification"));
    }
    let row_mix = sparsify_rows(
        reduced.matrix.row_bits(),
        &sol.row_strategy,
        epsilon,
        accept,
        seed,
        approx,
    )?;
    let t = reduced.matrix.transpose();
    let col_mix = sparsify_rows(
        t.row_bits(),
        &sol.col_strategy,
        epsilon,
        accept,
        crate::rng::derive(seed, 1),
        approx,
    )?;
    let row_multiset = Multiset::from_items(row_mix.concepts.expand().into_iter().map(|r| reduced.row_rep[r]));
    let col_multiset = Multiset::from_items(col_mix.concepts.expand().into_iter().map(|j| reduced.col_rep[j]));
    let (row_guarantee, col_guarantee) = uniform_guarantees(m, &row_multiset, &col_multiset);
    let certified_exploitability = (sol.upper_value - row_guarantee)
        .max(col_guarantee - sol.lower_value)
        .max(0.0);
    Ok(SparseEquilibrium {
        row_multiset,
        col_multiset,
        epsilon,
        certified_exploitability,
        lower_value: sol.lower_value,
        upper_value: sol.upper_value,
        row_guarantee,
        col_guarantee,
        row_vc: col_mix.certificate.vc_dimension,
        col_vc: row_mix.certificate.vc_dimension,
        row_ceiling: row_mix.certificate.size_ceiling,
        col_ceiling: col_mix.certificate.size_ceiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&str]) -> PayoffMatrix {
        PayoffMatrix::new(rows.iter().map(|s| BitRow::parse(s).unwrap()).collect()).unwrap()
    }

    fn pv(w: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(w.to_vec()).unwrap()
    }

    #[test]
    fn best_response_examples() {
        let ones = matrix(&["11", "11"]);
        assert_eq!(best_response(&ones, &pv(&[0.3, 0.7]), Side::Row).unwrap(), (0, 1.0));
        let id = matrix(&["10", "01"]);
        assert_eq!(best_response(&id, &pv(&[1.0, 0.0]), Side::Row).unwrap(), (0, 1.0));
        assert_eq!(best_response(&id, &pv(&[0.5, 0.5]), Side::Row).unwrap(), (0, 0.5));
        assert_eq!(best_response(&id, &pv(&[0.0, 1.0]), Side::Col).unwrap(), (0, 0.0));
        assert!(best_response(&id, &pv(&[0.2, 0.3, 0.5]), Side::Row).is_err());
    }

    #[test]
    fn exact_examples() {
        let cfg = GameConfig::default();
        let s = solve_exact(&matrix(&["111", "111"]), &cfg).unwrap();
        assert!((s.value_estimate - 1.0).abs() < 1e-12);
        let s = solve_exact(&matrix(&["10", "01"]), &cfg).unwrap();
        assert!((s.value_estimate - 0.5).abs() < 1e-9);
        assert!((s.row_strategy.weights()[0] - 0.5).abs() < 1e-9);
        assert!((s.col_strategy.weights()[0] - 0.5).abs() < 1e-9);
        let s = solve_exact(&matrix(&["110", "011", "101"]), &cfg).unwrap();
        assert!((s.value_estimate - 2.0 / 3.0).abs() < 1e-9);
        assert!(s.exploitability <= 1e-9);
    }

    #[test]
    fn exact_cap_is_enforced() {
        let cfg = GameConfig {
            exact_cap: 3,
            ..Default::default()
        };
        assert!(matches!(
            solve_exact(&matrix(&["10", "01"]), &cfg),
            Err(Error::ExactCapExceeded { .. })
        ));
    }

    #[test]
    fn mw_examples() {
        let cfg = GameConfig::default();
        let s = solve_mw(&matrix(&["111", "111"]), 0.01, &cfg).unwrap();
        assert!((0.99..=1.0).contains(&s.value_estimate));
        let s = solve_mw(&matrix(&["10", "01"]), 0.01, &cfg).unwrap();
        assert!((0.49..=0.51).contains(&s.value_estimate));
        assert!(s.exploitability <= 0.01);
        assert!(s.iterations > 0);
        assert!(solve_mw(&matrix(&["10", "01"]), 0.0, &cfg).is_err());
    }

    #[test]
    fn mw_convergence_error_carries_exploitability() {
        let cfg = GameConfig {
            max_iterations: 2,
            ..Default::default()
        };
        match solve_mw(&matrix(&["110", "011", "101"]), 1e-6, &cfg) {
            Err(Error::Convergence {
                iterations,
                exploitability,
            }) => {
                assert_eq!(iterations, 2);
                assert!(exploitability > 1e-6);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn sparse_nash_constant_matrix() {
        let m = matrix(&["111", "111"]);
        let eq = sparse_epsilon_nash(&m, 0.2, 1, &GameConfig::default(), &ApproxConfig::default()).unwrap();
        assert_eq!(eq.row_multiset.size(), 1);
        assert_eq!(eq.col_multiset.size(), 1);
        assert_eq!(eq.certified_exploitability, 0.0);
        assert!(eq.verify(&m));
    }

    #[test]
    fn sparse_nash_identity() {
        let m = matrix(&["10", "01"]);
        let eq = sparse_epsilon_nash(&m, 0.3, 5, &GameConfig::default(), &ApproxConfig::default()).unwrap();
        assert!(eq.certified_exploitability <= 0.3);
        let bound = (16.0 * (eq.col_vc as f64 + 1.0) / 0.09).ceil() as usize;
        assert!(eq.row_multiset.size() <= bound);
        assert!(eq.verify(&m));
        let mut tampered = eq.clone();
        tampered.row_guarantee += 0.01;
        assert!(!tampered.verify(&m));
    }

    #[test]
    fn parse_allows_repeated_rows() {
        let m = PayoffMatrix::parse("2 3\n10\n10\n01\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(PayoffMatrix::parse(&m.to_text()).unwrap(), m);
        let r = reduce(&m);
        assert_eq!(r.row_rep, vec![0, 2]);
        assert_eq!(r.col_rep, vec![0, 1]);
    }
}
