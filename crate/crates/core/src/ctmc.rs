//! Finite-state continuous-time Markov chains: rate matrices, transition
//! matrices by uniformization, identifiability margins, endpoint sampling,
//! and the [`GenerativeProcess`] interface shared with countable chains.

use std::fmt::{Debug, Display};
use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;

use crate::distribution::{total_variation, Distribution};
use crate::error::ProcessError;

/// Default Poisson tail mass left out of a uniformized series.
pub const UNIFORMIZATION_TOL: f64 = 1e-12;

/// A stochastic process that can be run for a given duration from a state.
pub trait GenerativeProcess: Sync {
    type State: Clone + Ord + Debug + Display + Send + Sync;

    /// Draws the state after running for time `t` from `start`.
    fn sample<R: Rng + ?Sized>(
        &self,
        start: &Self::State,
        t: f64,
        rng: &mut R,
    ) -> Result<Self::State, ProcessError>;

    /// The exact law after time `t`, when the process can compute it.
    fn exact_row(&self, _start: &Self::State, _t: f64) -> Option<Distribution<Self::State>> {
        None
    }
}

/// Generator of a conservative finite chain on states `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: usize,
    q: Vec<f64>,
}

impl RateMatrix {
    /// Builds from off-diagonal rates; diagonal entries of `rows` are
    /// ignored and replaced by minus the off-diagonal row sum.
    pub fn from_off_diagonal(rows: &[Vec<f64>]) -> Result<Self, ProcessError> {
        let n = rows.len();
        if n == 0 {
            return Err(ProcessError::InvalidRateMatrix("no states".into()));
        }
        let mut q = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ProcessError::InvalidRateMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut out = 0.0;
            for (j, &r) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(ProcessError::InvalidRateMatrix(format!(
                        "rate q[{i}][{j}] = {r}"
                    )));
                }
                q[i * n + j] = r;
                out += r;
            }
            q[i * n + i] = -out;
        }
        Ok(RateMatrix { n, q })
    }

    /// Builds from a full generator, checking that every row sums to zero.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, ProcessError> {
        let m = Self::from_off_diagonal(rows)?;
        for (i, row) in rows.iter().enumerate() {
            let d = row[i];
            if (d - m.q[i * m.n + i]).abs() > 1e-9 * (1.0 + d.abs()) {
                return Err(ProcessError::InvalidRateMatrix(format!(
                    "row {i} sums to {}",
                    d - m.q[i * m.n + i]
                )));
            }
        }
        Ok(m)
    }

    /// Two states flipping at rate `q` each way.
    pub fn two_state(q: f64) -> Result<Self, ProcessError> {
        Self::from_off_diagonal(&[vec![0.0, q], vec![q, 0.0]])
    }

    /// `n` states with every off-diagonal rate equal to `rate`.
    pub fn uniform(n: usize, rate: f64) -> Result<Self, ProcessError> {
        Self::from_off_diagonal(&vec![vec![rate; n]; n])
    }

    /// Four-state Jukes–Cantor chain with off-diagonal rate `rate`.
    pub fn jukes_cantor(rate: f64) -> Result<Self, ProcessError> {
        Self::uniform(4, rate)
    }

    /// Off-diagonal rates drawn uniformly from `[0, max_rate)`.
    pub fn random<R: Rng + ?Sized>(n: usize, max_rate: f64, rng: &mut R) -> Result<Self, ProcessError> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random::<f64>() * max_rate).collect())
            .collect();
        Self::from_off_diagonal(&rows)
    }

    /// Parses whitespace-separated rows; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ProcessError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        ProcessError::InvalidRateMatrix(format!(
                            "line {}: bad number `{tok}`",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(&rows)
    }

    pub fn from_file(path: &Path) -> Result<Self, ProcessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ProcessError::InvalidRateMatrix(format!("{}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    /// Total exit rate `q_i`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.q[i * self.n + i]
    }

    /// `sup_i Σ_j |q_ij|`.
    pub fn norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.rate(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `sup_i (q_i ∨ 1)`.
    pub fn q_star(&self) -> f64 {
        (0..self.n).map(|i| self.exit_rate(i)).fold(1.0, f64::max)
    }

    /// `e^{−q* h}`.
    pub fn f_star(&self, h: f64) -> f64 {
        (-self.q_star() * h).exp()
    }

    fn check_state(&self, i: usize) -> Result<(), ProcessError> {
        if i < self.n {
            Ok(())
        } else {
            Err(ProcessError::StateOutOfRange(i))
        }
    }
}

/// Dense row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    p: Vec<f64>,
}

impl TransitionMatrix {
    pub fn identity(n: usize) -> Self {
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            p[i * n + i] = 1.0;
        }
        TransitionMatrix { n, p }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    pub fn row(&self, i: usize) -> Distribution<usize> {
        Distribution::from_slice(self.row_slice(i)).expect("rows are renormalized")
    }

    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.n;
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.p[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    p[i * n + j] += a * other.p[k * n + j];
                }
            }
        }
        TransitionMatrix { n, p }
    }

    fn renormalize(&mut self) {
        let n = self.n;
        for row in self.p.chunks_mut(n) {
            for x in row.iter_mut() {
                *x = x.max(0.0);
            }
            let s: f64 = row.iter().sum();
            for x in row.iter_mut() {
                *x /= s;
            }
        }
    }
}

/// `exp(tQ)` by uniformization, dropping Poisson tail mass below `tol`.
///
/// Long horizons are split into `2^j` pieces of Poisson mean at most 8 and
/// squared back up, which keeps the leading weight `e^{−Λt}` representable.
pub fn transition_matrix(q: &RateMatrix, t: f64, tol: f64) -> Result<TransitionMatrix, ProcessError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ProcessError::InvalidRateMatrix(format!("bad time {t}")));
    }
    if !(tol > 0.0) {
        return Err(ProcessError::InvalidRateMatrix(format!("bad tolerance {tol}")));
    }
    let n = q.n;
    let lam = (0..n).map(|i| q.exit_rate(i)).fold(0.0, f64::max);
    if lam == 0.0 || t == 0.0 {
        return Ok(TransitionMatrix::identity(n));
    }
    let mut squarings = 0u32;
    while lam * t / 2f64.powi(squarings as i32) > 8.0 {
        squarings += 1;
    }
    let y = lam * t / 2f64.powi(squarings as i32);
    let tol_piece = tol / 2f64.powi(squarings as i32);

    let mut jump = TransitionMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            jump.p[i * n + j] += q.rate(i, j) / lam;
        }
    }
    let mut term = TransitionMatrix::identity(n);
    let mut w = (-y).exp();
    let mut acc: Vec<f64> = term.p.iter().map(|x| w * x).collect();
    let mut cum = w;
    let mut k = 0.0;
    while 1.0 - cum > tol_piece && k < 10_000.0 {
        term = term.mul(&jump);
        k += 1.0;
        w *= y / k;
        cum += w;
        for (a, x) in acc.iter_mut().zip(&term.p) {
            *a += w * x;
        }
    }
    let mut out = TransitionMatrix { n, p: acc };
    for _ in 0..squarings {
        out = out.mul(&out);
    }
    out.renormalize();
    Ok(out)
}

/// Minimum total variation between rows of `exp(tQ)` over pairs of
/// `states`; `+∞` when fewer than two states are given.
pub fn identifiability_margin(q: &RateMatrix, t: f64, states: &[usize]) -> Result<f64, ProcessError> {
    for &i in states {
        q.check_state(i)?;
    }
    let p = transition_matrix(q, t, UNIFORMIZATION_TOL)?;
    let rows: Vec<Distribution<usize>> = states.iter().map(|&i| p.row(i)).collect();
    let mut best = f64::INFINITY;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            if states[a] != states[b] {
                best = best.min(total_variation(&rows[a], &rows[b]));
            }
        }
    }
    Ok(best)
}

/// Gillespie simulation of the chain for time `t`.
pub fn sample_endpoint<R: Rng + ?Sized>(
    q: &RateMatrix,
    start: usize,
    t: f64,
    rng: &mut R,
) -> Result<usize, ProcessError> {
    q.check_state(start)?;
    let mut state = start;
    let mut clock = 0.0;
    loop {
        let rate = q.exit_rate(state);
        if rate <= 0.0 {
            return Ok(state);
        }
        let hold: f64 = rng.sample::<f64, _>(Exp1) / rate;
        clock += hold;
        if clock >= t {
            return Ok(state);
        }
        let mut u = rng.random::<f64>() * rate;
        let mut next = state;
        for j in (0..q.n).filter(|&j| j != state && q.rate(state, j) > 0.0) {
            next = j;
            let r = q.rate(state, j);
            if u < r {
                break;
            }
            u -= r;
        }
        state = next;
    }
}

impl GenerativeProcess for RateMatrix {
    type State = usize;

    fn sample<R: Rng + ?Sized>(&self, start: &usize, t: f64, rng: &mut R) -> Result<usize, ProcessError> {
        sample_endpoint(self, *start, t, rng)
    }

    fn exact_row(&self, start: &usize, t: f64) -> Option<Distribution<usize>> {
        if *start >= self.n {
            return None;
        }
        transition_matrix(self, t, UNIFORMIZATION_TOL)
            .ok()
            .map(|p| p.row(*start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    /// Taylor series on `tQ / 2^j` followed by `j` squarings.
    fn expm_oracle(q: &RateMatrix, t: f64) -> Vec<f64> {
        let n = q.n();
        let norm = q.norm() * t;
        let mut j = 0;
        while norm / 2f64.powi(j) > 0.5 {
            j += 1;
        }
        let scale = t / 2f64.powi(j);
        let a: Vec<f64> = (0..n * n).map(|k| q.q[k] * scale).collect();
        let mut sum = vec![0.0; n * n];
        let mut term = vec![0.0; n * n];
        for i in 0..n {
            sum[i * n + i] = 1.0;
            term[i * n + i] = 1.0;
        }
        for k in 1..30 {
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for l in 0..n {
                    for c in 0..n {
                        next[i * n + c] += term[i * n + l] * a[l * n + c];
                    }
                }
            }
            for x in next.iter_mut() {
                *x /= k as f64;
            }
            for (s, x) in sum.iter_mut().zip(&next) {
                *s += x;
            }
            term = next;
        }
        for _ in 0..j {
            let mut sq = vec![0.0; n * n];
            for i in 0..n {
                for l in 0..n {
                    for c in 0..n {
                        sq[i * n + c] += sum[i * n + l] * sum[l * n + c];
                    }
                }
            }
            sum = sq;
        }
        sum
    }

    #[test]
    fn identity_at_zero() {
        let q = RateMatrix::jukes_cantor(1.0).unwrap();
        assert_eq!(transition_matrix(&q, 0.0, 1e-12).unwrap(), TransitionMatrix::identity(4));
    }

    #[test]
    fn two_state_rows() {
        let q = RateMatrix::two_state(1.0).unwrap();
        let p = transition_matrix(&q, 2f64.ln() / 2.0, 1e-12).unwrap();
        assert!((p.get(0, 0) - 0.75).abs() < 1e-12);
        assert!((p.get(0, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn matches_series_oracle() {
        let mut rng = substream(11, 0, 0);
        for _ in 0..20 {
            let q = RateMatrix::random(4, 2.0, &mut rng).unwrap();
            for &t in &[0.7, 3.0, 40.0] {
                let p = transition_matrix(&q, t, 1e-12).unwrap();
                let o = expm_oracle(&q, t);
                for (x, y) in p.p.iter().zip(&o) {
                    assert!((x - y).abs() < 1e-9, "t = {t}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn margin_examples() {
        let q = RateMatrix::two_state(1.0).unwrap();
        let m = identifiability_margin(&q, 1.0, &[0, 1]).unwrap();
        assert!((m - (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(identifiability_margin(&q, 1.0, &[1]).unwrap(), f64::INFINITY);
        assert!(identifiability_margin(&q, 1.0, &[2]).is_err());
    }

    #[test]
    fn rate_summaries() {
        let q = RateMatrix::jukes_cantor(0.5).unwrap();
        assert_eq!(q.exit_rate(2), 1.5);
        assert_eq!(q.norm(), 3.0);
        assert_eq!(q.q_star(), 1.5);
        assert_eq!(RateMatrix::two_state(0.2).unwrap().q_star(), 1.0);
    }

    #[test]
    fn parse_matrix_text() {
        let q = RateMatrix::parse("# two state\n-1 1\n 2 -2\n").unwrap();
        assert_eq!(q.rate(1, 0), 2.0);
        assert!(RateMatrix::parse("-1 1\n2 -1\n").is_err());
        assert!(RateMatrix::parse("0 -1\n1 -1\n").is_err());
        assert!(RateMatrix::parse("-1 1 0\n1 -1\n").is_err());
    }

    #[test]
    fn endpoint_sampling() {
        let q = RateMatrix::two_state(1.0).unwrap();
        let mut rng = substream(5, 0, 0);
        assert_eq!(sample_endpoint(&q, 1, 0.0, &mut rng).unwrap(), 1);
        let absorbing = RateMatrix::from_off_diagonal(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(sample_endpoint(&absorbing, 0, 100.0, &mut rng).unwrap(), 0);

        let n = 100_000;
        let stay = (0..n)
            .filter(|_| sample_endpoint(&q, 0, 0.5, &mut rng).unwrap() == 0)
            .count() as f64
            / n as f64;
        let p = (1.0 + (-1.0f64).exp()) / 2.0;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((stay - p).abs() < 3.0 * sd, "{stay} vs {p}");
    }

    #[test]
    fn endpoint_sampling_multistate() {
        let q = RateMatrix::from_off_diagonal(&[
            vec![0.0, 0.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let p = transition_matrix(&q, 0.8, 1e-12).unwrap();
        let mut rng = substream(6, 0, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_endpoint(&q, 0, 0.8, &mut rng).unwrap()] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            let pj = p.get(0, j);
            let sd = (pj * (1.0 - pj) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - pj).abs() < 4.0 * sd + 1e-12);
        }
    }
}
