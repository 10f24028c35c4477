//! Root-state estimators: maximum a posteriori, the frequency-test
//! estimator on stretched well-spread restrictions, its uniform-chain
//! variant with a data-driven candidate set, and majority vote.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ctmc::GenerativeProcess;
use crate::distribution::{total_variation, tv_achieving_set, AchievingSet, Distribution};
use crate::error::{EstimatorError, TreeError};
use crate::rng::{domain, substream};
use crate::tree::{Tree, DEPTH_TOL};
use crate::treechain::{LeafAssignment, LeafLaw};

/// Default number of endpoint samples behind a Monte Carlo row.
pub const DEFAULT_ROW_SAMPLES: usize = 100_000;

/// Rows `p^i(h*)` keyed by starting state.
pub type Rows<S> = BTreeMap<S, Arc<Distribution<S>>>;

fn argmax_by_label<S: Clone>(scored: impl IntoIterator<Item = (S, f64)>) -> Option<(S, f64)> {
    let mut best: Option<(S, f64)> = None;
    for (s, w) in scored {
        if best.as_ref().is_none_or(|(_, b)| w > *b) {
            best = Some((s, w));
        }
    }
    best
}

fn posterior_weights(
    laws: &BTreeMap<usize, LeafLaw>,
    prior: &Distribution<usize>,
    observed: &LeafAssignment<usize>,
    states: &[usize],
) -> Result<Vec<(usize, f64)>, EstimatorError> {
    states
        .iter()
        .map(|&i| {
            let w = prior.mass(&i);
            if w == 0.0 {
                return Ok((i, 0.0));
            }
            let law = laws
                .get(&i)
                .ok_or_else(|| EstimatorError::MissingRow(i.to_string()))?;
            let outcome = observed.select(&law.leaves)?;
            Ok((i, w * law.probability(&outcome)))
        })
        .collect()
}

/// The state maximizing prior × leaf likelihood; ties go to the smallest
/// label.
pub fn map_estimate(
    laws: &BTreeMap<usize, LeafLaw>,
    prior: &Distribution<usize>,
    observed: &LeafAssignment<usize>,
) -> Result<usize, EstimatorError> {
    let states: Vec<usize> = prior.support().copied().collect();
    let scored = posterior_weights(laws, prior, observed, &states)?;
    match argmax_by_label(scored) {
        Some((i, w)) if w > 0.0 => Ok(i),
        _ => Err(EstimatorError::ImpossibleObservation),
    }
}

/// As [`map_estimate`] with the maximum taken over `lambda` only.
pub fn restricted_map_estimate(
    laws: &BTreeMap<usize, LeafLaw>,
    prior: &Distribution<usize>,
    observed: &LeafAssignment<usize>,
    lambda: &[usize],
) -> Result<usize, EstimatorError> {
    let mut lambda = lambda.to_vec();
    lambda.sort_unstable();
    lambda.dedup();
    match lambda.as_slice() {
        [] => Err(EstimatorError::EmptyCandidates),
        [only] => Ok(*only),
        _ => {
            let scored = posterior_weights(laws, prior, observed, &lambda)?;
            let (best, w) = argmax_by_label(scored).expect("lambda is nonempty");
            if w > 0.0 {
                return Ok(best);
            }
            // nothing in lambda explains the data; any choice is equally wrong
            map_estimate(laws, prior, observed).map(|_| best)
        }
    }
}

/// Majority vote on a two-state chain with an odd number of leaves:
/// state 1 iff more than half the leaves are in state 1.
pub fn majority_estimate(observed: &LeafAssignment<usize>) -> Result<usize, EstimatorError> {
    let m = observed.len();
    if m.is_multiple_of(2) {
        return Err(EstimatorError::EvenLeafCount(m));
    }
    let mut ones = 0;
    for &s in observed.values() {
        match s {
            0 => {}
            1 => ones += 1,
            other => return Err(EstimatorError::NotTwoState(other)),
        }
    }
    Ok(usize::from(2 * ones > m))
}

/// The shortest prefix of `ordered` whose remaining mass is below `epsilon`.
pub fn lambda_epsilon<S>(ordered: impl IntoIterator<Item = (S, f64)>, epsilon: f64) -> Vec<S> {
    let mut out = Vec::new();
    let mut tail = 1.0;
    for (s, p) in ordered {
        if tail < epsilon {
            break;
        }
        out.push(s);
        tail -= p;
    }
    out
}

/// Candidate set of a prior over labelled states, taken in label order.
pub fn lambda_epsilon_from_prior(prior: &Distribution<usize>, epsilon: f64) -> Vec<usize> {
    let n = prior.support().last().map_or(0, |&s| s + 1);
    lambda_epsilon((0..n).map(|i| (i, prior.mass(&i))), epsilon)
}

/// The well-spread restriction at scale `s`, with each leaf's extension
/// time up to `h*`. Built once per tree and reused across realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictionPlan {
    pub s: f64,
    pub h_star: f64,
    pub leaves: Vec<String>,
    pub extensions: Vec<f64>,
    pub spread: f64,
}

impl RestrictionPlan {
    pub fn new(tree: &Tree, s: f64, h_star: f64) -> Result<Self, EstimatorError> {
        let leaves = tree.well_spread_leaves(s)?;
        if leaves.is_empty() {
            return Err(EstimatorError::EmptyRestriction(s));
        }
        let mut extensions = Vec::with_capacity(leaves.len());
        for leaf in &leaves {
            let depth = tree.leaf_depth(leaf)?;
            if depth > h_star + DEPTH_TOL {
                return Err(TreeError::HeightTooSmall {
                    target: h_star,
                    height: depth,
                }
                .into());
            }
            extensions.push((h_star - depth).max(0.0));
        }
        let spread = if leaves.len() < 2 {
            0.0
        } else {
            tree.restrict(&leaves)?.spread()?
        };
        Ok(RestrictionPlan {
            s,
            h_star,
            leaves,
            extensions,
            spread,
        })
    }

    pub fn m(&self) -> usize {
        self.leaves.len()
    }

    /// Leaf states of the stretched restriction: each selected leaf's
    /// observed state is run forward for its extension time.
    pub fn stretch<P: GenerativeProcess, R: Rng + ?Sized>(
        &self,
        process: &P,
        observed: &LeafAssignment<P::State>,
        rng: &mut R,
    ) -> Result<Vec<P::State>, EstimatorError> {
        let base = observed.select(&self.leaves)?;
        base.into_iter()
            .zip(&self.extensions)
            .map(|(x, &t)| {
                if t > DEPTH_TOL {
                    Ok(process.sample(&x, t, rng)?)
                } else {
                    Ok(x)
                }
            })
            .collect()
    }
}

struct PairTest<S: Ord> {
    set: AchievingSet<S>,
    target: f64,
}

/// The pairwise frequency tests for a fixed candidate set and fixed rows.
pub struct FrequencyTests<S: Ord> {
    lambda: Vec<S>,
    delta: f64,
    tests: Vec<Vec<Option<PairTest<S>>>>,
}

/// Outcome of the frequency tests on one stretched sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision<S> {
    pub estimate: S,
    pub fallback: bool,
    /// For each candidate, the smallest `N_A/m − (p_{iA} − Δ/2)` over its
    /// tests; a candidate passes when this is positive.
    pub min_margins: Vec<(S, f64)>,
}

impl<S: Ord + Clone + std::fmt::Debug> FrequencyTests<S> {
    /// `rows[i]` must be the law at time `h*` from state `i`, for every `i`
    /// in `lambda`.
    pub fn new(lambda: &[S], rows: &Rows<S>) -> Result<Self, EstimatorError> {
        let mut lambda = lambda.to_vec();
        lambda.sort();
        lambda.dedup();
        if lambda.is_empty() {
            return Err(EstimatorError::EmptyCandidates);
        }
        let row_of = |i: &S| {
            rows.get(i)
                .cloned()
                .ok_or_else(|| EstimatorError::MissingRow(format!("{i:?}")))
        };
        let picked: Vec<Arc<Distribution<S>>> = lambda.iter().map(row_of).collect::<Result<_, _>>()?;
        let n = lambda.len();
        let mut delta = f64::INFINITY;
        let mut tests = Vec::with_capacity(n);
        for a in 0..n {
            let mut row = Vec::with_capacity(n);
            for b in 0..n {
                if a == b {
                    row.push(None);
                    continue;
                }
                delta = delta.min(total_variation(&picked[a], &picked[b]));
                let set = tv_achieving_set(&picked[a], &picked[b], (&lambda[a], &lambda[b]));
                let target = set.mass_under(&picked[a]);
                row.push(Some(PairTest { set, target }));
            }
            tests.push(row);
        }
        Ok(FrequencyTests {
            lambda,
            delta,
            tests,
        })
    }

    pub fn lambda(&self) -> &[S] {
        &self.lambda
    }

    /// Minimum pairwise distance of the rows; `+∞` for a single candidate.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Applies every test to `sample`. At most one candidate can pass; if
    /// none does, a uniformly random candidate is returned and flagged.
    pub fn decide<R: Rng + ?Sized>(&self, sample: &[S], rng: &mut R) -> Result<Decision<S>, EstimatorError> {
        if self.lambda.len() == 1 {
            return Ok(Decision {
                estimate: self.lambda[0].clone(),
                fallback: false,
                min_margins: Vec::new(),
            });
        }
        if sample.is_empty() {
            return Err(EstimatorError::EmptyRestriction(0.0));
        }
        let mut counts: BTreeMap<&S, usize> = BTreeMap::new();
        for s in sample {
            *counts.entry(s).or_insert(0) += 1;
        }
        let m = sample.len() as f64;
        let mut passing = Vec::new();
        let mut min_margins = Vec::with_capacity(self.lambda.len());
        for (a, i) in self.lambda.iter().enumerate() {
            let mut worst = f64::INFINITY;
            for test in self.tests[a].iter().flatten() {
                let hits: usize = counts
                    .iter()
                    .filter(|(s, _)| test.set.contains(s))
                    .map(|(_, c)| c)
                    .sum();
                let margin = hits as f64 / m - (test.target - self.delta / 2.0);
                worst = worst.min(margin);
            }
            if worst > 0.0 {
                passing.push(a);
            }
            min_margins.push((i.clone(), worst));
        }
        match passing.as_slice() {
            [a] => Ok(Decision {
                estimate: self.lambda[*a].clone(),
                fallback: false,
                min_margins,
            }),
            [] => Ok(Decision {
                estimate: self.lambda[rng.random_range(0..self.lambda.len())].clone(),
                fallback: true,
                min_margins,
            }),
            many => Err(EstimatorError::ExclusivityViolated {
                passing: many.len(),
            }),
        }
    }
}

/// Result of one estimator call.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport<S> {
    pub estimate: S,
    pub fallback: bool,
    /// Candidate set the tests ran over.
    pub candidates: Vec<S>,
    pub min_margins: Vec<(S, f64)>,
    pub delta: f64,
    pub s: f64,
    pub m: usize,
    pub spread: f64,
}

impl<S> EstimatorReport<S> {
    fn from_decision(d: Decision<S>, candidates: Vec<S>, delta: f64, plan: &RestrictionPlan) -> Self {
        EstimatorReport {
            estimate: d.estimate,
            fallback: d.fallback,
            candidates,
            min_margins: d.min_margins,
            delta,
            s: plan.s,
            m: plan.m(),
            spread: plan.spread,
        }
    }
}

/// Rows `p^i(h*)`, exact when the process provides them and Monte Carlo
/// estimates otherwise. Computed rows are cached.
pub struct RowCache<'a, P: GenerativeProcess> {
    process: &'a P,
    h_star: f64,
    samples: usize,
    seed: u64,
    rows: Mutex<Rows<P::State>>,
}

/// Stable 64-bit key of a state's printed form, used to seed its row.
fn state_key<S: std::fmt::Display>(s: &S) -> u64 {
    let digest = Sha256::digest(s.to_string().as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

impl<'a, P: GenerativeProcess> RowCache<'a, P> {
    pub fn new(process: &'a P, h_star: f64, samples: usize, seed: u64) -> Self {
        RowCache {
            process,
            h_star,
            samples: samples.max(1),
            seed,
            rows: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn h_star(&self) -> f64 {
        self.h_star
    }

    pub fn row(&self, i: &P::State) -> Result<Arc<Distribution<P::State>>, EstimatorError> {
        if let Some(r) = self.rows.lock().expect("row cache poisoned").get(i) {
            return Ok(r.clone());
        }
        let row = match self.process.exact_row(i, self.h_star) {
            Some(r) => r,
            None => {
                let mut rng = substream(self.seed, domain::ROWS, state_key(i));
                let draws = (0..self.samples)
                    .map(|_| self.process.sample(i, self.h_star, &mut rng))
                    .collect::<Result<Vec<_>, _>>()?;
                Distribution::empirical(draws.iter())?
            }
        };
        let row = Arc::new(row);
        self.rows
            .lock()
            .expect("row cache poisoned")
            .insert(i.clone(), row.clone());
        Ok(row)
    }

    pub fn rows(&self, states: &[P::State]) -> Result<Rows<P::State>, EstimatorError> {
        states.iter().map(|i| Ok((i.clone(), self.row(i)?))).collect()
    }
}

/// Frequency-test estimator over a fixed candidate set.
pub struct FrequencyEstimator<S: Ord> {
    plan: RestrictionPlan,
    tests: FrequencyTests<S>,
}

impl<S: Ord + Clone + std::fmt::Debug> FrequencyEstimator<S> {
    pub fn new(
        tree: &Tree,
        s: f64,
        h_star: f64,
        lambda: &[S],
        rows: &Rows<S>,
    ) -> Result<Self, EstimatorError> {
        if lambda.is_empty() {
            return Err(EstimatorError::EmptyCandidates);
        }
        Ok(FrequencyEstimator {
            plan: RestrictionPlan::new(tree, s, h_star)?,
            tests: FrequencyTests::new(lambda, rows)?,
        })
    }

    pub fn plan(&self) -> &RestrictionPlan {
        &self.plan
    }

    pub fn tests(&self) -> &FrequencyTests<S> {
        &self.tests
    }

    /// `rng` drives the extension segments and the fallback draw.
    pub fn estimate<P, R>(
        &self,
        process: &P,
        observed: &LeafAssignment<S>,
        rng: &mut R,
    ) -> Result<EstimatorReport<S>, EstimatorError>
    where
        P: GenerativeProcess<State = S>,
        R: Rng + ?Sized,
    {
        let sample = self.plan.stretch(process, observed, rng)?;
        let d = self.tests.decide(&sample, rng)?;
        Ok(EstimatorReport::from_decision(
            d,
            self.tests.lambda().to_vec(),
            self.tests.delta(),
            &self.plan,
        ))
    }
}

/// One-shot frequency-test estimate. Prefer [`FrequencyEstimator`] when
/// estimating many realizations on the same tree.
#[allow(clippy::too_many_arguments)]
pub fn frequency_estimate<P: GenerativeProcess, R: Rng + ?Sized>(
    tree: &Tree,
    process: &P,
    observed: &LeafAssignment<P::State>,
    s: f64,
    h_star: f64,
    lambda: &[P::State],
    rows: &Rows<P::State>,
    rng: &mut R,
) -> Result<EstimatorReport<P::State>, EstimatorError> {
    FrequencyEstimator::new(tree, s, h_star, lambda, rows)?.estimate(process, observed, rng)
}

type TestCache<S> = BTreeMap<Vec<S>, Arc<FrequencyTests<S>>>;

/// Frequency-test estimator whose candidates are the states seen on at
/// least half of `f_* = e^{−q* h*}` of the stretched leaves.
pub struct UniformChainEstimator<'a, P: GenerativeProcess> {
    plan: RestrictionPlan,
    q_star: f64,
    rows: RowCache<'a, P>,
    tests: Mutex<TestCache<P::State>>,
}

impl<'a, P: GenerativeProcess> UniformChainEstimator<'a, P> {
    pub fn new(tree: &Tree, s: f64, h_star: f64, q_star: f64, rows: RowCache<'a, P>) -> Result<Self, EstimatorError> {
        if !(q_star >= 1.0) {
            return Err(EstimatorError::Tree(TreeError::InvalidParams(format!(
                "q* = {q_star} must be at least 1"
            ))));
        }
        Ok(UniformChainEstimator {
            plan: RestrictionPlan::new(tree, s, h_star)?,
            q_star,
            rows,
            tests: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn plan(&self) -> &RestrictionPlan {
        &self.plan
    }

    pub fn f_star(&self) -> f64 {
        (-self.q_star * self.plan.h_star).exp()
    }

    fn tests_for(&self, lambda: Vec<P::State>) -> Result<Arc<FrequencyTests<P::State>>, EstimatorError> {
        if let Some(t) = self.tests.lock().expect("test cache poisoned").get(&lambda) {
            return Ok(t.clone());
        }
        let rows = self.rows.rows(&lambda)?;
        let t = Arc::new(FrequencyTests::new(&lambda, &rows)?);
        self.tests
            .lock()
            .expect("test cache poisoned")
            .insert(lambda, t.clone());
        Ok(t)
    }

    pub fn estimate<R: Rng + ?Sized>(
        &self,
        observed: &LeafAssignment<P::State>,
        rng: &mut R,
    ) -> Result<EstimatorReport<P::State>, EstimatorError> {
        let sample = self.plan.stretch(self.rows.process, observed, rng)?;
        let mut counts: BTreeMap<P::State, usize> = BTreeMap::new();
        for s in &sample {
            *counts.entry(s.clone()).or_insert(0) += 1;
        }
        let m = sample.len() as f64;
        let threshold = self.f_star() / 2.0;
        let lambda_hat: Vec<P::State> = counts
            .iter()
            .filter(|(_, &c)| c as f64 / m >= threshold)
            .map(|(s, _)| s.clone())
            .collect();
        if lambda_hat.is_empty() {
            let seen: Vec<P::State> = counts.into_keys().collect();
            let pick = seen[rng.random_range(0..seen.len())].clone();
            return Ok(EstimatorReport {
                estimate: pick,
                fallback: true,
                candidates: Vec::new(),
                min_margins: Vec::new(),
                delta: f64::NAN,
                s: self.plan.s,
                m: self.plan.m(),
                spread: self.plan.spread,
            });
        }
        let tests = self.tests_for(lambda_hat.clone())?;
        let d = tests.decide(&sample, rng)?;
        Ok(EstimatorReport::from_decision(d, lambda_hat, tests.delta(), &self.plan))
    }
}
