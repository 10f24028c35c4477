//! Closed-form reconstruction bounds, deviation bounds with explicit
//! constants, and the Monte Carlo error harness they are compared against.

use std::collections::BTreeMap;
use std::fmt::Debug;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{total_variation, Distribution};
use crate::error::BoundError;
use crate::rng::{domain, substream};

/// Two-sided 99% normal quantile used for Wilson intervals.
pub const Z_99: f64 = 2.5758;

/// A bound after applying its validity condition and clamping to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    /// The formula evaluated as written, even outside its validity region.
    pub raw: f64,
    /// `min(raw, 1)` when valid, otherwise 1.
    pub value: f64,
    pub valid: bool,
    /// True when the reported value is 1 and so carries no information.
    pub vacuous: bool,
}

impl BoundValue {
    pub fn new(raw: f64, valid: bool) -> Self {
        let value = if valid && raw.is_finite() { raw.min(1.0) } else { 1.0 };
        BoundValue {
            raw,
            value,
            valid,
            vacuous: value >= 1.0,
        }
    }
}

/// Inputs of the explicit error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundInputs {
    /// Prior tail mass left outside the candidate set.
    pub epsilon: f64,
    /// Size of the candidate set.
    pub n_epsilon: usize,
    /// Minimum pairwise row distance over the candidate set at `h*`.
    pub delta_epsilon: f64,
    /// `max (q_i ∨ 1)` over the candidate set (or over all states).
    pub q_star: f64,
    /// Truncation scale.
    pub s: f64,
    /// Number of leaves of the stretched restriction.
    pub m: usize,
    /// `e^{−q* h*}`.
    pub f_star: f64,
    /// Minimum pairwise row distance over all states at `h*`.
    pub delta_q_hstar: f64,
}

fn check_prior_support<S: Ord + Clone + Debug>(prior: &Distribution<S>) -> Result<(), BoundError> {
    if prior.len() < 2 {
        return Err(BoundError::TooFewStates(prior.len()));
    }
    Ok(())
}

fn conditional<'a, S: Ord + Debug, Y: Ord>(
    conditionals: &'a BTreeMap<S, Distribution<Y>>,
    i: &S,
) -> Result<&'a Distribution<Y>, BoundError> {
    conditionals
        .get(i)
        .ok_or_else(|| BoundError::InvalidInput(format!("no conditional law for {i:?}")))
}

/// Upper bound on the best achievable success probability:
/// `1 − sup_{i1≠i2} (μ0(i1) ∧ μ0(i2)) (1 − TV(μ1^{i1}, μ1^{i2}))`.
pub fn recon_upper<S, Y>(
    prior: &Distribution<S>,
    conditionals: &BTreeMap<S, Distribution<Y>>,
) -> Result<f64, BoundError>
where
    S: Ord + Clone + Debug,
    Y: Ord + Clone + Debug,
{
    check_prior_support(prior)?;
    let states: Vec<(&S, f64)> = prior.iter().collect();
    let mut best: f64 = 0.0;
    for (a, &(i1, w1)) in states.iter().enumerate() {
        for &(i2, w2) in &states[a + 1..] {
            let tv = total_variation(conditional(conditionals, i1)?, conditional(conditionals, i2)?);
            best = best.max(w1.min(w2) * (1.0 - tv));
        }
    }
    Ok(1.0 - best)
}

/// Lower bound on the best achievable success probability restricted to
/// `lambda`: `Σ_Λ μ0(i) − Σ_{i1≠i2∈Λ, ordered} (μ0(i1) ∨ μ0(i2)) (1 − TV)`.
pub fn recon_lower<S, Y>(
    prior: &Distribution<S>,
    conditionals: &BTreeMap<S, Distribution<Y>>,
    lambda: &[S],
) -> Result<f64, BoundError>
where
    S: Ord + Clone + Debug,
    Y: Ord + Clone + Debug,
{
    if lambda.is_empty() {
        return Err(BoundError::EmptyCandidates);
    }
    let mass: f64 = lambda.iter().map(|i| prior.mass(i)).sum();
    let mut penalty = 0.0;
    for (a, i1) in lambda.iter().enumerate() {
        for i2 in &lambda[a + 1..] {
            if i1 == i2 {
                continue;
            }
            let tv = total_variation(conditional(conditionals, i1)?, conditional(conditionals, i2)?);
            // both orders of the pair contribute the same term
            penalty += 2.0 * prior.mass(i1).max(prior.mass(i2)) * (1.0 - tv);
        }
    }
    Ok(mass - penalty)
}

/// `m/4 + 2 (q_i ∨ 1) · spread · m²`.
pub fn variance_bound(leaf_count: usize, spread: f64, q_i: f64) -> f64 {
    let m = leaf_count as f64;
    m / 4.0 + 2.0 * q_i.max(1.0) * spread * m * m
}

/// `4/Δ*² · (1/(4m) + 2 (q_i ∨ 1) s)`.
pub fn chebyshev_star_bound(delta_star: f64, m: usize, q_i: f64, s: f64) -> Result<BoundValue, BoundError> {
    if !(delta_star > 0.0) {
        return Err(BoundError::ZeroSeparation);
    }
    if m == 0 {
        return Err(BoundError::InvalidInput("m must be at least 1".into()));
    }
    let raw = 4.0 / (delta_star * delta_star) * (1.0 / (4.0 * m as f64) + 2.0 * q_i.max(1.0) * s);
    Ok(BoundValue::new(raw, true))
}

fn check_inputs(inp: &BoundInputs, delta: f64) -> Result<(), BoundError> {
    if !(inp.s >= 0.0 && inp.s.is_finite()) {
        return Err(BoundError::InvalidInput(format!("s = {}", inp.s)));
    }
    if inp.m == 0 {
        return Err(BoundError::InvalidInput("m must be at least 1".into()));
    }
    if !(delta > 0.0) {
        return Err(BoundError::ZeroSeparation);
    }
    if !(inp.q_star >= 1.0) {
        return Err(BoundError::InvalidInput(format!("q* = {} is below 1", inp.q_star)));
    }
    Ok(())
}

/// Error bound for the frequency estimator over the candidate set, with
/// `δ = Δ_ε/8`:
/// `ε + (1 − e^{−q* s})/δ² + n_ε exp(−2δ² m/(1+δ))`,
/// valid when `1 − e^{−q* s} ≤ Δ_ε/4`.
pub fn thm2_general_bound(inp: &BoundInputs) -> Result<BoundValue, BoundError> {
    let d = inp.delta_epsilon.min(1.0);
    check_inputs(inp, d)?;
    if !(inp.epsilon > 0.0) {
        return Err(BoundError::InvalidInput(format!("epsilon = {}", inp.epsilon)));
    }
    let delta = d / 8.0;
    let drift = -(-inp.q_star * inp.s).exp_m1();
    let m = inp.m as f64;
    let raw = inp.epsilon
        + drift / (delta * delta)
        + inp.n_epsilon as f64 * (-2.0 * delta * delta * m / (1.0 + delta)).exp();
    Ok(BoundValue::new(raw, drift <= d / 4.0))
}

/// Minimax error bound for the uniform-chain estimator, with
/// `g = f_* ∧ Δ_{Q,h*}` and `δ = g/8`:
/// `(1 − e^{−q* s})/δ² + 11 f_*^{−1} exp(−g² m/64)`,
/// valid when `1 − e^{−q* s} ≤ g/4`.
pub fn prop54_uniform_bound(inp: &BoundInputs) -> Result<BoundValue, BoundError> {
    if !(inp.f_star > 0.0 && inp.f_star <= 1.0) {
        return Err(BoundError::InvalidInput(format!("f_* = {}", inp.f_star)));
    }
    let g = inp.f_star.min(inp.delta_q_hstar);
    check_inputs(inp, g)?;
    let delta = g / 8.0;
    let drift = -(-inp.q_star * inp.s).exp_m1();
    let raw = drift / (delta * delta) + 11.0 / inp.f_star * (-g * g * inp.m as f64 / 64.0).exp();
    Ok(BoundValue::new(raw, drift <= g / 4.0))
}

/// Parameters of the two-state pinched star: `α = p_11(s)` and
/// `β = p_12(h − s)`.
pub fn pinched_star_alpha_beta(q: f64, s: f64, h: f64) -> (f64, f64) {
    let alpha = (1.0 + (-2.0 * q * s).exp()) / 2.0;
    let beta = (1.0 - (-2.0 * q * (h - s)).exp()) / 2.0;
    (alpha, beta)
}

fn ln_choose(m: usize, n: usize) -> f64 {
    let lg = |k: usize| (1..=k).map(|x| (x as f64).ln()).sum::<f64>();
    lg(m) - lg(n) - lg(m - n)
}

/// Exact majority-vote error on the two-state pinched star with `m` (odd)
/// leaves:
/// `Σ_{n<m/2} C(m,n) [α (1−β)^n β^{m−n} + (1−α) β^n (1−β)^{m−n}]`.
pub fn majority_exact_error(m: usize, q: f64, s: f64, h: f64) -> Result<f64, BoundError> {
    if m.is_multiple_of(2) {
        return Err(BoundError::InvalidInput(format!("m = {m} must be odd")));
    }
    if !(q >= 0.0 && s > 0.0 && h > s) {
        return Err(BoundError::InvalidInput("need q ≥ 0 and 0 < s < h".into()));
    }
    let (alpha, beta) = pinched_star_alpha_beta(q, s, h);
    let mut total = 0.0;
    for n in 0..=(m / 2) {
        let c = ln_choose(m, n);
        let (n, rest) = (n as f64, (m - n) as f64);
        let keep = (c + n * (1.0 - beta).ln() + rest * beta.ln()).exp();
        let flip = (c + n * beta.ln() + rest * (1.0 - beta).ln()).exp();
        total += alpha * keep + (1.0 - alpha) * flip;
    }
    Ok(total)
}

/// `(1 − α) + α exp(−2m(½ − β)²)`.
pub fn majority_hoeffding_bound(m: usize, q: f64, s: f64, h: f64) -> f64 {
    let (alpha, beta) = pinched_star_alpha_beta(q, s, h);
    (1.0 - alpha) + alpha * (-2.0 * m as f64 * (0.5 - beta).powi(2)).exp()
}

/// Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Empirical error rate with a 99% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub trials: usize,
    pub errors: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, trials, Z_99);
        ErrorEstimate {
            trials,
            errors,
            rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }

    /// One binomial standard error at the observed rate.
    pub fn std_error(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials.max(1) as f64).sqrt()
    }

    /// Whether the rate is at most `bound` allowing `sigmas` binomial
    /// standard errors, taken at the bound itself.
    pub fn within(&self, bound: f64, sigmas: f64) -> bool {
        let b = bound.clamp(0.0, 1.0);
        self.rate <= bound + sigmas * (b * (1.0 - b) / self.trials.max(1) as f64).sqrt()
    }
}

/// Runs `trials` independent trials in parallel. Trial `t` receives its own
/// stream derived from `(seed, t)`, and results come back in trial order, so
/// the output does not depend on the number of worker threads.
pub fn run_trials<T, E, F>(trials: usize, seed: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T, E> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, domain::TRIAL, t as u64);
            f(t, &mut rng)
        })
        .collect()
}

/// Monte Carlo error of an estimator. `trial` simulates one realization
/// and reports whether the estimate was wrong.
pub fn monte_carlo_error<E, F>(trials: usize, seed: u64, trial: F) -> Result<ErrorEstimate, E>
where
    E: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<bool, E> + Sync,
{
    let wrong = run_trials(trials, seed, trial)?;
    Ok(ErrorEstimate::from_counts(
        wrong.iter().filter(|w| **w).count(),
        trials,
    ))
}
