//! Config-driven Monte Carlo experiments.
//!
//! A config is a TOML file:
//!
//! ```toml
//! seed = 7
//! trials = 10000
//! ks = [50, 200]
//! output = "out/figure1"
//!
//! [family]
//! kind = "figure1"
//! k = 200
//! height = 1.0
//!
//! [process]
//! kind = "two_state"
//! q = 1.0
//!
//! [estimator]
//! kind = "frequency"
//! epsilon = 0.01
//! s = 0.05
//! h_star = 1.0
//! ```
//!
//! A run produces two CSV tables.
//!
//! `trials.csv` has columns `trial,k,root,estimate,correct,fallback,margins`,
//! one row per trial and `k`. `margins` holds `state:margin` pairs joined by
//! `;`, each the smallest test margin of that candidate; it is empty for
//! estimators without frequency tests.
//!
//! `summary.csv` has columns `config_hash,k,m,s,trials,errors,empirical,
//! ci_low,ci_high,bound,bound_valid,empirical_le_bound,fallbacks`. The CI is
//! the 99% Wilson interval and `empirical_le_bound` allows three binomial
//! standard errors at the bound.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bounds::{
    majority_hoeffding_bound, prop54_uniform_bound, run_trials, thm2_general_bound, BoundInputs, BoundValue,
    ErrorEstimate,
};
use crate::ctmc::{identifiability_margin, RateMatrix};
use crate::distribution::Distribution;
use crate::error::{BoundError, EstimatorError, ProcessError, TreeError};
use crate::estimators::{
    lambda_epsilon_from_prior, majority_estimate, map_estimate, FrequencyEstimator, FrequencyTests, RestrictionPlan,
    RowCache, UniformChainEstimator, DEFAULT_ROW_SAMPLES,
};
use crate::family::FamilySpec;
use crate::rng::{domain, substream};
use crate::tkf91::{stationary_sample, tkf91_lambda_epsilon, Tkf91Params, Tkf91Sequence};
use crate::tree::Tree;
use crate::treechain::{exact_leaf_law, simulate, LeafAssignment, LeafLaw};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Directory receiving `trials.csv` and `summary.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Counts handed to [`FamilySpec::member`]. Empty means the family as
    /// written.
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<RootSpec>,
    pub family: FamilySpec,
    pub process: ProcessSpec,
    pub estimator: EstimatorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    TwoState { q: f64 },
    JukesCantor { rate: f64 },
    Uniform { n: usize, rate: f64 },
    /// Rate matrix in the text format of [`RateMatrix::parse`].
    MatrixFile { path: PathBuf },
    Tkf91(Tkf91Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Map,
    Frequency,
    Uniform,
    Majority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub s: f64,
    #[serde(default = "default_h_star")]
    pub h_star: f64,
    #[serde(default = "default_row_samples")]
    pub row_samples: usize,
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_h_star() -> f64 {
    1.0
}

fn default_row_samples() -> usize {
    DEFAULT_ROW_SAMPLES
}

/// How the true root is drawn. Finite chains default to `uniform`, TKF91 to
/// `stationary`. With `fixed`, estimators that need a prior use the uniform
/// one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RootSpec {
    Uniform,
    Prior { weights: Vec<f64> },
    Fixed { state: String },
    Stationary,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ProcessError> for ExperimentError {
    fn from(e: ProcessError) -> Self {
        ExperimentError::Estimator(e.into())
    }
}

impl From<TreeError> for ExperimentError {
    fn from(e: TreeError) -> Self {
        ExperimentError::Estimator(e.into())
    }
}

impl ExperimentError {
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Parse(_) | ExperimentError::Invalid(_))
    }

    /// Size or length guards tripped while running.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            ExperimentError::Estimator(EstimatorError::Process(
                ProcessError::SizeGuard { .. } | ProcessError::LengthCap { .. }
            ))
        )
    }
}

/// A resolved process.
#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    Chain(RateMatrix),
    Tkf91(Tkf91Params),
}

impl ProcessSpec {
    pub fn build(&self) -> Result<Process, ProcessError> {
        Ok(match self {
            ProcessSpec::TwoState { q } => Process::Chain(RateMatrix::two_state(*q)?),
            ProcessSpec::JukesCantor { rate } => Process::Chain(RateMatrix::jukes_cantor(*rate)?),
            ProcessSpec::Uniform { n, rate } => {
                if *n < 2 {
                    return Err(ProcessError::InvalidRateMatrix(format!("uniform chain needs n >= 2, got {n}")));
                }
                Process::Chain(RateMatrix::uniform(*n, *rate)?)
            }
            ProcessSpec::MatrixFile { path } => Process::Chain(RateMatrix::from_file(path)?),
            ProcessSpec::Tkf91(p) => {
                p.validate()?;
                Process::Tkf91(*p)
            }
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string().trim_end().to_owned()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form, with
    /// the output directory left out.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let text = toml::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Every violated constraint. Empty means the config can run.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let est = &self.estimator;
        if self.trials == 0 {
            out.push("trials must be at least 1".to_owned());
        }
        if !(est.s > 0.0 && est.s.is_finite()) {
            out.push(format!("estimator.s must be > 0 (got {})", est.s));
        }
        if !(est.h_star > 0.0 && est.h_star.is_finite()) {
            out.push(format!("estimator.h_star must be > 0 (got {})", est.h_star));
        }
        if !(est.epsilon > 0.0 && est.epsilon < 1.0) {
            out.push(format!("estimator.epsilon must lie in (0, 1) (got {})", est.epsilon));
        }
        if est.row_samples == 0 {
            out.push("estimator.row_samples must be at least 1".to_owned());
        }
        out.extend(self.family.violations().into_iter().map(|v| format!("family: {v}")));
        if self.ks.contains(&0) {
            out.push("ks must be positive".to_owned());
        }

        let process = match &self.process {
            ProcessSpec::Tkf91(p) => {
                let v = p.violations();
                out.extend(v.iter().map(|v| format!("process: {v}")));
                v.is_empty().then_some(Process::Tkf91(*p))
            }
            other => match other.build() {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push(format!("process: {e}"));
                    None
                }
            },
        };
        let Some(process) = process else {
            return out;
        };
        match &process {
            Process::Chain(q) => {
                if est.kind == EstimatorKind::Majority && q.n() != 2 {
                    out.push("estimator: majority needs a two-state chain".to_owned());
                }
                match &self.root {
                    None | Some(RootSpec::Uniform) => {}
                    Some(RootSpec::Stationary) => out.push("root: stationary applies to tkf91 only".to_owned()),
                    Some(RootSpec::Prior { weights }) => {
                        if weights.len() != q.n() {
                            out.push(format!("root: prior has {} weights for {} states", weights.len(), q.n()));
                        } else if let Err(e) = Distribution::from_weights(weights.iter().copied().enumerate()) {
                            out.push(format!("root: {e}"));
                        }
                    }
                    Some(RootSpec::Fixed { state }) => match state.parse::<usize>() {
                        Ok(i) if i < q.n() => {}
                        _ => out.push(format!("root: `{state}` is not a state of a {}-state chain", q.n())),
                    },
                }
            }
            Process::Tkf91(_) => {
                if est.kind != EstimatorKind::Frequency {
                    out.push("estimator: tkf91 supports the frequency estimator only".to_owned());
                }
                match &self.root {
                    None | Some(RootSpec::Stationary) => {}
                    Some(RootSpec::Fixed { state }) => {
                        if state.parse::<Tkf91Sequence>().is_err() {
                            out.push(format!("root: `{state}` is not a sequence"));
                        }
                    }
                    Some(_) => out.push("root: tkf91 takes a stationary or fixed root".to_owned()),
                }
            }
        }
        out
    }

    /// `(k, tree)` pairs to run on.
    pub fn members(&self) -> Result<Vec<(usize, Tree)>, TreeError> {
        if self.ks.is_empty() {
            let tree = self.family.last_tree()?;
            let k = match &self.family {
                FamilySpec::Star { k, .. }
                | FamilySpec::Figure1 { k, .. }
                | FamilySpec::Figure2 { k, .. }
                | FamilySpec::RandomUltrametric { k, .. } => *k,
                FamilySpec::PinchedStar { m, .. } => *m,
                FamilySpec::NewickFile { .. } => tree.leaf_count(),
            };
            return Ok(vec![(k, tree)]);
        }
        self.ks.iter().map(|&k| Ok((k, self.family.member(k)?))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub k: usize,
    pub root: String,
    pub estimate: String,
    pub correct: bool,
    pub fallback: bool,
    pub margins: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub config_hash: String,
    pub k: usize,
    pub m: usize,
    pub s: f64,
    pub trials: usize,
    pub errors: usize,
    pub empirical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub bound_valid: bool,
    pub empirical_le_bound: bool,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub config_hash: String,
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutcome {
    pub fn write_trials_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        write_rows(w, &self.trials)
    }

    pub fn write_summary_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        write_rows(w, &self.summary)
    }

    /// Writes `trials.csv` and `summary.csv` into `dir`, creating it.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io = |source| ExperimentError::Io {
            path: dir.to_owned(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        let open = |name: &str| {
            let path = dir.join(name);
            fs::File::create(&path).map_err(|source| ExperimentError::Io { path, source })
        };
        self.write_trials_csv(open("trials.csv")?)?;
        self.write_summary_csv(open("summary.csv")?)?;
        Ok(())
    }
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

fn format_margins<S: Display>(margins: &[(S, f64)]) -> String {
    margins
        .iter()
        .map(|(s, m)| format!("{s}:{m}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn record<S: Display + PartialEq>(
    trial: usize,
    k: usize,
    root: &S,
    estimate: &S,
    fallback: bool,
    margins: &[(S, f64)],
) -> TrialRecord {
    TrialRecord {
        trial,
        k,
        root: root.to_string(),
        estimate: estimate.to_string(),
        correct: root == estimate,
        fallback,
        margins: format_margins(margins),
    }
}

fn sample_prior<R: Rng + ?Sized>(prior: &Distribution<usize>, rng: &mut R) -> usize {
    let mut u = rng.random::<f64>();
    let mut last = 0;
    for (&i, p) in prior.iter() {
        if u < p {
            return i;
        }
        u -= p;
        last = i;
    }
    last
}

/// Checks the config, then runs every `k`. Trial `t` uses the same streams
/// at every `k`, and the output is identical for any number of threads.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    checked(config)?;
    let hash = config.config_hash();
    let mut trials = Vec::new();
    let mut summary = Vec::new();
    let process = config.process.build()?;
    for (k, tree) in config.members()? {
        let (records, m, bound) = match &process {
            Process::Chain(q) => run_chain(config, q, &tree, k)?,
            Process::Tkf91(p) => run_tkf91(config, p, &tree, k)?,
        };
        let errors = records.iter().filter(|r| !r.correct).count();
        let err = ErrorEstimate::from_counts(errors, config.trials);
        summary.push(SummaryRow {
            config_hash: hash.clone(),
            k,
            m,
            s: config.estimator.s,
            trials: config.trials,
            errors,
            empirical: err.rate,
            ci_low: err.ci_low,
            ci_high: err.ci_high,
            bound: bound.value,
            bound_valid: bound.valid,
            empirical_le_bound: err.within(bound.value, 3.0),
            fallbacks: records.iter().filter(|r| r.fallback).count(),
        });
        trials.extend(records);
    }
    Ok(ExperimentOutcome {
        config_hash: hash,
        trials,
        summary,
    })
}

/// One leaf-state observation estimated outside a full run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleEstimate {
    pub estimate: String,
    pub fallback: bool,
    pub margins: String,
}

/// `(k, m, bound)` for every `k` of the config, without running trials.
pub fn bounds_only(config: &ExperimentConfig) -> Result<Vec<(usize, usize, BoundValue)>, ExperimentError> {
    checked(config)?;
    let process = config.process.build()?;
    config
        .members()?
        .into_iter()
        .map(|(k, tree)| {
            let (m, bound) = match &process {
                Process::Chain(q) => {
                    let setup = ChainSetup::new(config, q, &tree)?;
                    (setup.m, setup.bound)
                }
                Process::Tkf91(p) => {
                    let setup = Tkf91Setup::new(config, p, &tree)?;
                    (setup.m, setup.bound)
                }
            };
            Ok((k, m, bound))
        })
        .collect()
}

/// Picks the tree for `k`, or the first configured one.
pub fn tree_for(config: &ExperimentConfig, k: Option<usize>) -> Result<(usize, Tree), ExperimentError> {
    Ok(match k {
        Some(k) => (k, config.family.member(k)?),
        None => config.members()?.swap_remove(0),
    })
}

/// Simulates one realization on the tree for `k` and writes its leaves as
/// `leaf,state` CSV. `root` overrides the configured root law.
pub fn simulate_csv<W: Write>(
    config: &ExperimentConfig,
    k: Option<usize>,
    root: Option<&str>,
    out: W,
) -> Result<String, ExperimentError> {
    checked(config)?;
    let (_, tree) = tree_for(config, k)?;
    let mut rng = substream(config.seed, domain::TRIAL, 0);
    let bad_root = |r: &str| ExperimentError::Invalid(vec![format!("root: `{r}` is not a state")]);
    match config.process.build()? {
        Process::Chain(q) => {
            let root = match root {
                Some(r) => r.parse::<usize>().ok().filter(|&i| i < q.n()).ok_or_else(|| bad_root(r))?,
                None => sample_prior(&chain_priors(config, q.n())?.0, &mut rng),
            };
            simulate(&tree, &q, &root, &mut rng)?.write_csv(out)?;
            Ok(root.to_string())
        }
        Process::Tkf91(p) => {
            let root = match root.or(fixed_root(config)) {
                Some(r) => r.parse::<Tkf91Sequence>().map_err(|_| bad_root(r))?,
                None => stationary_sample(&p, &mut rng)?,
            };
            simulate(&tree, &p, &root, &mut rng)?.write_csv(out)?;
            Ok(root.to_string())
        }
    }
}

/// Runs the configured estimator once on `leaf,state` CSV input.
pub fn estimate_csv<R: std::io::Read>(
    config: &ExperimentConfig,
    k: Option<usize>,
    input: R,
) -> Result<SingleEstimate, ExperimentError> {
    checked(config)?;
    let (_, tree) = tree_for(config, k)?;
    let mut ext = substream(config.seed, domain::EXTENSION, 0);
    let (estimate, fallback, margins) = match config.process.build()? {
        Process::Chain(q) => {
            let leaves = LeafAssignment::<usize>::read_csv(input)?;
            let (e, f, m) = ChainSetup::new(config, &q, &tree)?.estimator.estimate(&q, &leaves, &mut ext)?;
            (e.to_string(), f, format_margins(&m))
        }
        Process::Tkf91(p) => {
            let leaves = LeafAssignment::<Tkf91Sequence>::read_csv(input)?;
            let r = Tkf91Setup::new(config, &p, &tree)?.estimator.estimate(&p, &leaves, &mut ext)?;
            (r.estimate.to_string(), r.fallback, format_margins(&r.min_margins))
        }
    };
    Ok(SingleEstimate {
        estimate,
        fallback,
        margins,
    })
}

fn checked(config: &ExperimentConfig) -> Result<(), ExperimentError> {
    let problems = config.validate();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(ExperimentError::Invalid(problems))
    }
}

fn fixed_root(config: &ExperimentConfig) -> Option<&str> {
    match &config.root {
        Some(RootSpec::Fixed { state }) => Some(state),
        _ => None,
    }
}

/// The law of the true root and the prior the estimators use.
fn chain_priors(config: &ExperimentConfig, n: usize) -> Result<(Distribution<usize>, Distribution<usize>), ExperimentError> {
    let uniform = Distribution::from_slice(&vec![1.0 / n as f64; n])?;
    Ok(match &config.root {
        None | Some(RootSpec::Uniform) | Some(RootSpec::Stationary) => (uniform.clone(), uniform),
        Some(RootSpec::Prior { weights }) => {
            let p = Distribution::from_weights(weights.iter().copied().enumerate())?;
            (p.clone(), p)
        }
        Some(RootSpec::Fixed { state }) => {
            let i: usize = state.parse().map_err(|_| ProcessError::StateOutOfRange(n))?;
            (Distribution::point(i), uniform)
        }
    })
}

enum ChainEstimator<'a> {
    Frequency(FrequencyEstimator<usize>),
    Map {
        laws: BTreeMap<usize, LeafLaw>,
        prior: Distribution<usize>,
    },
    Uniform(UniformChainEstimator<'a, RateMatrix>),
    Majority,
}

type Outcome<S> = (S, bool, Vec<(S, f64)>);

impl ChainEstimator<'_> {
    fn estimate<R: Rng + ?Sized>(
        &self,
        q: &RateMatrix,
        leaves: &LeafAssignment<usize>,
        ext: &mut R,
    ) -> Result<Outcome<usize>, EstimatorError> {
        Ok(match self {
            ChainEstimator::Frequency(fe) => {
                let r = fe.estimate(q, leaves, ext)?;
                (r.estimate, r.fallback, r.min_margins)
            }
            ChainEstimator::Uniform(ue) => {
                let r = ue.estimate(leaves, ext)?;
                (r.estimate, r.fallback, r.min_margins)
            }
            ChainEstimator::Map { laws, prior } => (map_estimate(laws, prior, leaves)?, false, Vec::new()),
            ChainEstimator::Majority => (majority_estimate(leaves)?, false, Vec::new()),
        })
    }
}

struct ChainSetup<'a> {
    truth: Distribution<usize>,
    estimator: ChainEstimator<'a>,
    m: usize,
    bound: BoundValue,
}

impl<'a> ChainSetup<'a> {
    fn new(config: &ExperimentConfig, q: &'a RateMatrix, tree: &Tree) -> Result<Self, ExperimentError> {
        let n = q.n();
        let (truth, prior) = chain_priors(config, n)?;
        let est = &config.estimator;
        let lambda = lambda_epsilon_from_prior(&prior, est.epsilon);
        let q_star_lambda = lambda.iter().map(|&i| q.exit_rate(i)).fold(1.0, f64::max);
        let cache = RowCache::new(q, est.h_star, est.row_samples, config.seed);
        let thm2 = |delta_epsilon: f64, m: usize| {
            thm2_general_bound(&BoundInputs {
                epsilon: est.epsilon,
                n_epsilon: lambda.len(),
                delta_epsilon,
                q_star: q_star_lambda,
                s: est.s,
                m,
                ..Default::default()
            })
        };
        let (estimator, m, bound) = match est.kind {
            EstimatorKind::Frequency => {
                let rows = cache.rows(&lambda)?;
                let fe = FrequencyEstimator::new(tree, est.s, est.h_star, &lambda, &rows)?;
                let m = fe.plan().m();
                let bound = thm2(fe.tests().delta(), m)?;
                (ChainEstimator::Frequency(fe), m, bound)
            }
            EstimatorKind::Map => {
                let laws = prior
                    .support()
                    .map(|&i| Ok((i, exact_leaf_law(tree, q, i)?)))
                    .collect::<Result<BTreeMap<_, _>, ProcessError>>()?;
                let delta = FrequencyTests::new(&lambda, &cache.rows(&lambda)?)?.delta();
                let m = RestrictionPlan::new(tree, est.s, est.h_star)?.m();
                // the MAP rule minimizes the prior-averaged error, so a bound
                // for the frequency estimator covers it too
                (ChainEstimator::Map { laws, prior }, m, thm2(delta, m)?)
            }
            EstimatorKind::Uniform => {
                let all: Vec<usize> = (0..n).collect();
                let delta_q_hstar = identifiability_margin(q, est.h_star, &all)?;
                let ue = UniformChainEstimator::new(tree, est.s, est.h_star, q.q_star(), cache)?;
                let m = ue.plan().m();
                let bound = prop54_uniform_bound(&BoundInputs {
                    q_star: q.q_star(),
                    s: est.s,
                    m,
                    f_star: q.f_star(est.h_star),
                    delta_q_hstar,
                    ..Default::default()
                })?;
                (ChainEstimator::Uniform(ue), m, bound)
            }
            EstimatorKind::Majority => {
                let m = tree.leaf_count();
                let bound = match &config.family {
                    FamilySpec::PinchedStar { s, height, .. } if q.rate(0, 1) == q.rate(1, 0) => {
                        BoundValue::new(majority_hoeffding_bound(m, q.rate(0, 1), *s, *height), true)
                    }
                    _ => BoundValue::new(f64::NAN, false),
                };
                (ChainEstimator::Majority, m, bound)
            }
        };
        Ok(ChainSetup {
            truth,
            estimator,
            m,
            bound,
        })
    }
}

type RunResult = Result<(Vec<TrialRecord>, usize, BoundValue), ExperimentError>;

fn run_chain(config: &ExperimentConfig, q: &RateMatrix, tree: &Tree, k: usize) -> RunResult {
    let setup = ChainSetup::new(config, q, tree)?;
    let seed = config.seed;
    let records = run_trials(config.trials, seed, |t, rng| {
        let root = sample_prior(&setup.truth, rng);
        let leaves = simulate(tree, q, &root, rng)?;
        let mut ext = substream(seed, domain::EXTENSION, t as u64);
        let (e, fallback, margins) = setup.estimator.estimate(q, &leaves, &mut ext)?;
        Ok::<_, EstimatorError>(record(t, k, &root, &e, fallback, &margins))
    })?;
    Ok((records, setup.m, setup.bound))
}

struct Tkf91Setup {
    fixed: Option<Tkf91Sequence>,
    estimator: FrequencyEstimator<Tkf91Sequence>,
    m: usize,
    bound: BoundValue,
}

impl Tkf91Setup {
    fn new(config: &ExperimentConfig, params: &Tkf91Params, tree: &Tree) -> Result<Self, ExperimentError> {
        let est = &config.estimator;
        let fixed = match fixed_root(config) {
            Some(state) => Some(
                state
                    .parse()
                    .map_err(|_| ExperimentError::Invalid(vec![format!("root: `{state}` is not a sequence")]))?,
            ),
            None => None,
        };
        let lambda: Vec<Tkf91Sequence> = tkf91_lambda_epsilon(params, est.epsilon)?
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        let cache = RowCache::new(params, est.h_star, est.row_samples, config.seed);
        let rows = cache.rows(&lambda)?;
        let estimator = FrequencyEstimator::new(tree, est.s, est.h_star, &lambda, &rows)?;
        let m = estimator.plan().m();
        // Δ_ε comes from Monte Carlo rows here, so the bound is approximate
        let q_star = lambda.iter().map(|x| params.exit_rate(x.len())).fold(1.0, f64::max);
        let bound = thm2_general_bound(&BoundInputs {
            epsilon: est.epsilon,
            n_epsilon: lambda.len(),
            delta_epsilon: estimator.tests().delta(),
            q_star,
            s: est.s,
            m,
            ..Default::default()
        })?;
        Ok(Tkf91Setup {
            fixed,
            estimator,
            m,
            bound,
        })
    }
}

fn run_tkf91(config: &ExperimentConfig, params: &Tkf91Params, tree: &Tree, k: usize) -> RunResult {
    let setup = Tkf91Setup::new(config, params, tree)?;
    let seed = config.seed;
    let records = run_trials(config.trials, seed, |t, rng| {
        let root = match &setup.fixed {
            Some(x) => x.clone(),
            None => stationary_sample(params, rng)?,
        };
        let leaves = simulate(tree, params, &root, rng)?;
        let mut ext = substream(seed, domain::EXTENSION, t as u64);
        let r = setup.estimator.estimate(params, &leaves, &mut ext)?;
        Ok::<_, EstimatorError>(record(t, k, &root, &r.estimate, r.fallback, &r.min_margins))
    })?;
    Ok((records, setup.m, setup.bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
trials = 200
ks = [5, 9]

[family]
kind = "figure1"
k = 9
height = 1.0

[process]
kind = "two_state"
q = 1.0

[estimator]
kind = "frequency"
s = 0.05
"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.estimator.epsilon, 0.01);
        assert_eq!(c.estimator.row_samples, DEFAULT_ROW_SAMPLES);
        assert!(c.validate().is_empty());
        assert_eq!(c.config_hash().len(), 16);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = BASE.replace("q = 1.0", "q = 1.0\nrat = 2");
        let e = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("rat"), "{e}");
    }

    #[test]
    fn tkf91_lambda_equal_mu() {
        let text = BASE.replace(
            "kind = \"two_state\"\nq = 1.0",
            "kind = \"tkf91\"\nnu = 1.0\nlambda = 1.0\nmu = 1.0",
        );
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.validate(), vec!["process: lambda must be < mu".to_owned()]);
    }

    #[test]
    fn all_violations_listed() {
        let text = BASE.replace("s = 0.05", "s = -1.0").replace("trials = 200", "trials = 0");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.validate().len(), 2);
    }

    #[test]
    fn hash_ignores_output_and_layout() {
        let a = ExperimentConfig::from_toml_str(BASE).unwrap();
        let mut b = ExperimentConfig::from_toml_str(&BASE.replace("seed = 3", "seed   =   3\noutput = \"x\"")).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        b.seed = 4;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn run_is_repeatable() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.summary.len(), 2);
        assert_eq!(a.trials.len(), 400);
        let mut csv = Vec::new();
        a.write_summary_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(
            "config_hash,k,m,s,trials,errors,empirical,ci_low,ci_high,bound,bound_valid,empirical_le_bound,fallbacks\n"
        ));
    }

    #[test]
    fn zero_rate_keeps_root() {
        let text = BASE.replace("q = 1.0", "q = 0.0").replace("kind = \"frequency\"", "kind = \"map\"");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        let out = run(&c).unwrap();
        assert!(out.trials.iter().all(|r| r.correct));
    }

    #[test]
    fn simulate_then_estimate() {
        let c = ExperimentConfig::from_toml_str(&BASE.replace("q = 1.0", "q = 0.0")).unwrap();
        let mut buf = Vec::new();
        let root = simulate_csv(&c, Some(9), Some("1"), &mut buf).unwrap();
        assert_eq!(root, "1");
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(",1")));
        let e = estimate_csv(&c, Some(9), text.as_bytes()).unwrap();
        assert_eq!(e.estimate, "1");
    }

    #[test]
    fn guard_is_reported() {
        let text = BASE
            .replace("ks = [5, 9]", "ks = [40]")
            .replace("kind = \"frequency\"", "kind = \"map\"");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert!(run(&c).unwrap_err().is_guard());
    }
}
