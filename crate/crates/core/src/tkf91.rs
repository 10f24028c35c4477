//! The TKF91 insertion, deletion and substitution process on nucleotide
//! sequences behind an undeletable immortal link.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, Exp1, Geometric};
use serde::{Deserialize, Serialize};

use crate::bounds::{run_trials, ErrorEstimate};
use crate::ctmc::GenerativeProcess;
use crate::error::{EstimatorError, ProcessError};
use crate::estimators::{lambda_epsilon, FrequencyEstimator, RowCache};
use crate::rng::{domain, substream};
use crate::family::FamilySpec;
use crate::treechain::simulate;

/// Hard cap on the number of sites in one trajectory.
pub const LENGTH_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nucleotide {
    A,
    C,
    G,
    T,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    pub fn as_char(self) -> char {
        match self {
            Nucleotide::A => 'A',
            Nucleotide::C => 'C',
            Nucleotide::G => 'G',
            Nucleotide::T => 'T',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Nucleotide::A),
            'C' => Some(Nucleotide::C),
            'G' => Some(Nucleotide::G),
            'T' => Some(Nucleotide::T),
            _ => None,
        }
    }
}

/// Nucleotides after the immortal link. Ordered by length, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Tkf91Sequence(pub Vec<Nucleotide>);

impl Tkf91Sequence {
    pub fn empty() -> Self {
        Tkf91Sequence(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Tkf91Sequence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Tkf91Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prints the letters; the empty sequence prints as `-`.
impl fmt::Display for Tkf91Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for n in &self.0 {
            write!(f, "{}", n.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Tkf91Sequence {
    type Err = ProcessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" {
            return Ok(Tkf91Sequence::empty());
        }
        s.chars()
            .map(|c| {
                Nucleotide::from_char(c)
                    .ok_or_else(|| ProcessError::InvalidTkf91(format!("bad nucleotide `{c}`")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Tkf91Sequence)
    }
}

fn quarter() -> f64 {
    0.25
}

/// Rates per unit time and letter frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tkf91Params {
    pub nu: f64,
    pub lambda: f64,
    pub mu: f64,
    #[serde(default = "quarter")]
    pub pi_a: f64,
    #[serde(default = "quarter")]
    pub pi_c: f64,
    #[serde(default = "quarter")]
    pub pi_g: f64,
    #[serde(default = "quarter")]
    pub pi_t: f64,
}

impl Tkf91Params {
    /// Uniform letter frequencies.
    pub fn new(nu: f64, lambda: f64, mu: f64) -> Self {
        Tkf91Params {
            nu,
            lambda,
            mu,
            pi_a: 0.25,
            pi_c: 0.25,
            pi_g: 0.25,
            pi_t: 0.25,
        }
    }

    /// Frequencies in `A, C, G, T` order.
    pub fn pi(&self) -> [f64; 4] {
        [self.pi_a, self.pi_c, self.pi_g, self.pi_t]
    }

    pub fn pi_of(&self, n: Nucleotide) -> f64 {
        self.pi()[n as usize]
    }

    /// Every violated constraint, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("nu", self.nu), ("lambda", self.lambda), ("mu", self.mu)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("{name} must be positive and finite (got {v})"));
            }
        }
        if !(self.lambda < self.mu) {
            out.push("lambda must be < mu".to_owned());
        }
        let pi = self.pi();
        if pi.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            out.push("letter frequencies must be nonnegative".to_owned());
        } else if (pi.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            out.push(format!(
                "letter frequencies must sum to 1 (got {})",
                pi.iter().sum::<f64>()
            ));
        }
        out
    }

    /// Total event rate of a sequence of length `len`, counting the
    /// immortal link's insertions.
    pub fn exit_rate(&self, len: usize) -> f64 {
        len as f64 * (self.nu + self.mu) + (len + 1) as f64 * self.lambda
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(ProcessError::InvalidTkf91(v)),
        }
    }

    fn draw_letter<R: Rng + ?Sized>(&self, rng: &mut R) -> Nucleotide {
        let mut u = rng.random::<f64>();
        for n in Nucleotide::ALL {
            let p = self.pi_of(n);
            if u < p {
                return n;
            }
            u -= p;
        }
        // rounding left `u` just above the total
        *Nucleotide::ALL
            .iter()
            .rev()
            .find(|n| self.pi_of(**n) > 0.0)
            .expect("frequencies sum to 1")
    }
}

/// Runs the process for time `t` by exact event simulation.
pub fn tkf91_evolve<R: Rng + ?Sized>(
    params: &Tkf91Params,
    seq: &Tkf91Sequence,
    t: f64,
    rng: &mut R,
) -> Result<Tkf91Sequence, ProcessError> {
    params.validate()?;
    let mut sites = seq.0.clone();
    let mut clock = 0.0;
    loop {
        let m = sites.len() as f64;
        let total = params.exit_rate(sites.len());
        clock += rng.sample::<f64, _>(Exp1) / total;
        if clock >= t {
            return Ok(Tkf91Sequence(sites));
        }
        let u = rng.random::<f64>() * total;
        let sub = m * params.nu;
        let del = sub + m * params.mu;
        if u < sub {
            let k = ((u / params.nu) as usize).min(sites.len() - 1);
            sites[k] = params.draw_letter(rng);
        } else if u < del {
            let k = (((u - sub) / params.mu) as usize).min(sites.len() - 1);
            sites.remove(k);
        } else {
            // parent 0 is the immortal link; the child lands right after it
            let parent = (((u - del) / params.lambda) as usize).min(sites.len());
            if sites.len() >= LENGTH_CAP {
                return Err(ProcessError::LengthCap { cap: LENGTH_CAP });
            }
            sites.insert(parent, params.draw_letter(rng));
        }
    }
}

/// Draws from the stationary law: a geometric length with ratio `λ/μ`
/// and independent letters.
pub fn stationary_sample<R: Rng + ?Sized>(params: &Tkf91Params, rng: &mut R) -> Result<Tkf91Sequence, ProcessError> {
    params.validate()?;
    let geo = Geometric::new(1.0 - params.lambda / params.mu)
        .map_err(|e| ProcessError::InvalidTkf91(e.to_string()))?;
    let m = geo.sample(rng) as usize;
    if m > LENGTH_CAP {
        return Err(ProcessError::LengthCap { cap: LENGTH_CAP });
    }
    Ok(Tkf91Sequence((0..m).map(|_| params.draw_letter(rng)).collect()))
}

/// Stationary probability of a length: `(1 − λ/μ)(λ/μ)^M`.
pub fn stationary_length_pmf(params: &Tkf91Params, m: usize) -> Result<f64, ProcessError> {
    params.validate()?;
    let r = params.lambda / params.mu;
    Ok((1.0 - r) * r.powi(m as i32))
}

/// Stationary probability `(1 − λ/μ)(λ/μ)^M Π π_{x_i}`.
pub fn stationary_pmf(params: &Tkf91Params, seq: &Tkf91Sequence) -> Result<f64, ProcessError> {
    let len = stationary_length_pmf(params, seq.len())?;
    Ok(seq.0.iter().fold(len, |acc, n| acc * params.pi_of(*n)))
}

struct Ranked(f64, Tkf91Sequence);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    // larger mass first, then shorter, then lexicographically smaller
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Sequences in decreasing stationary mass, stopping once the remaining
/// mass is below `epsilon`. Equal masses are ordered by length, then
/// lexicographically.
pub fn tkf91_lambda_epsilon(params: &Tkf91Params, epsilon: f64) -> Result<Vec<(Tkf91Sequence, f64)>, ProcessError> {
    params.validate()?;
    if !(epsilon > 0.0) {
        return Err(ProcessError::InvalidTkf91(format!("epsilon must be positive (got {epsilon})")));
    }
    let r = params.lambda / params.mu;
    let mut heap = BinaryHeap::new();
    heap.push(Ranked(1.0 - r, Tkf91Sequence::empty()));
    // a child's mass is its parent's times r·π < 1, so pops come out sorted
    let ordered = std::iter::from_fn(move || {
        let Ranked(p, seq) = heap.pop()?;
        for n in Nucleotide::ALL {
            let w = params.pi_of(n);
            if w > 0.0 {
                let mut child = seq.0.clone();
                child.push(n);
                heap.push(Ranked(p * r * w, Tkf91Sequence(child)));
            }
        }
        Some((seq, p))
    });
    let chosen = lambda_epsilon(ordered.map(|(s, p)| ((s, p), p)), epsilon);
    Ok(chosen)
}

impl GenerativeProcess for Tkf91Params {
    type State = Tkf91Sequence;

    fn sample<R: Rng + ?Sized>(&self, start: &Tkf91Sequence, t: f64, rng: &mut R) -> Result<Tkf91Sequence, ProcessError> {
        tkf91_evolve(self, start, t, rng)
    }
}

/// Settings of a root-reconstruction run on a nested family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tkf91Experiment {
    pub params: Tkf91Params,
    pub s: f64,
    pub h_star: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub row_samples: usize,
    pub seed: u64,
}

/// Per-`k` outcome of [`Tkf91Experiment::run`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tkf91Row {
    pub k: usize,
    pub m: usize,
    pub lambda_size: usize,
    pub delta: f64,
    pub fallbacks: usize,
    pub error: ErrorEstimate,
}

impl Tkf91Experiment {
    /// Estimates the root from stationary-rooted realizations on the trees
    /// `family.member(k)`. Rows are Monte Carlo estimates shared by every
    /// `k`; trial `t` uses the same seed-derived streams at every `k`.
    pub fn run(&self, family: &FamilySpec, ks: &[usize]) -> Result<Vec<Tkf91Row>, EstimatorError> {
        self.params.validate()?;
        let lambda: Vec<Tkf91Sequence> = tkf91_lambda_epsilon(&self.params, self.epsilon)?
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        let cache = RowCache::new(&self.params, self.h_star, self.row_samples, self.seed);
        let rows = cache.rows(&lambda)?;
        let mut out = Vec::with_capacity(ks.len());
        for &k in ks {
            let tree = &family.member(k)?;
            let est = FrequencyEstimator::new(tree, self.s, self.h_star, &lambda, &rows)?;
            let results = run_trials(self.trials, self.seed, |t, rng| {
                let root = stationary_sample(&self.params, rng)?;
                let leaves = simulate(tree, &self.params, &root, rng)?;
                let mut ext = substream(self.seed, domain::EXTENSION, t as u64);
                let r = est.estimate(&self.params, &leaves, &mut ext)?;
                Ok::<_, EstimatorError>((r.estimate != root, r.fallback))
            })?;
            let errors = results.iter().filter(|r| r.0).count();
            out.push(Tkf91Row {
                k,
                m: est.plan().m(),
                lambda_size: lambda.len(),
                delta: est.tests().delta(),
                fallbacks: results.iter().filter(|r| r.1).count(),
                error: ErrorEstimate::from_counts(errors, self.trials),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{total_variation, Distribution};

    fn seq(s: &str) -> Tkf91Sequence {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(seq("ACGT").to_string(), "ACGT");
        assert_eq!(seq("-"), Tkf91Sequence::empty());
        assert_eq!(Tkf91Sequence::empty().to_string(), "-");
        assert!("AXG".parse::<Tkf91Sequence>().is_err());
        assert!(seq("T") < seq("AA"));
        assert!(seq("AC") < seq("AG"));
    }

    #[test]
    fn params_validation() {
        assert!(Tkf91Params::new(1.0, 1.0, 2.0).validate().is_ok());
        assert_eq!(
            Tkf91Params::new(1.0, 1.0, 1.0).violations(),
            vec!["lambda must be < mu".to_owned()]
        );
        let mut p = Tkf91Params::new(1.0, 0.5, 1.0);
        p.pi_a = 0.5;
        assert_eq!(p.violations().len(), 1);
    }

    #[test]
    fn stationary_pmf_examples() {
        let p = Tkf91Params::new(1.0, 1.0, 2.0);
        assert_eq!(stationary_pmf(&p, &Tkf91Sequence::empty()).unwrap(), 0.5);
        assert_eq!(stationary_pmf(&p, &seq("A")).unwrap(), 0.0625);
        let tiny = Tkf91Params::new(1.0, 1e-12, 2.0);
        assert!(stationary_pmf(&tiny, &Tkf91Sequence::empty()).unwrap() > 1.0 - 1e-11);
        assert!(stationary_pmf(&Tkf91Params::new(1.0, 2.0, 2.0), &seq("A")).is_err());
    }

    #[test]
    fn evolve_trivial_cases() {
        let p = Tkf91Params::new(1.0, 1.0, 2.0);
        let mut rng = substream(1, 0, 0);
        let x = seq("ACGTTA");
        assert_eq!(tkf91_evolve(&p, &x, 0.0, &mut rng).unwrap(), x);
        let frozen = Tkf91Params::new(1.0, 1e-300, 2.0);
        for _ in 0..100 {
            assert!(tkf91_evolve(&frozen, &Tkf91Sequence::empty(), 10.0, &mut rng)
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn stationary_sampler_matches_pmf() {
        let p = Tkf91Params::new(1.0, 1.0, 2.0);
        let mut rng = substream(2, 0, 0);
        let n = 50_000;
        let draws: Vec<Tkf91Sequence> = (0..n).map(|_| stationary_sample(&p, &mut rng).unwrap()).collect();
        let empty = draws.iter().filter(|s| s.is_empty()).count() as f64 / n as f64;
        assert!((empty - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        let a = draws.iter().filter(|s| **s == seq("A")).count() as f64 / n as f64;
        assert!((a - 0.0625).abs() < 4.0 * (0.0625 * 0.9375 / n as f64).sqrt());
    }

    #[test]
    fn evolution_keeps_length_law() {
        let p = Tkf91Params::new(1.0, 1.0, 2.0);
        let mut rng = substream(3, 0, 0);
        let n = 20_000;
        let lengths: Vec<usize> = (0..n)
            .map(|_| {
                let x = stationary_sample(&p, &mut rng).unwrap();
                tkf91_evolve(&p, &x, 0.5, &mut rng).unwrap().len().min(30)
            })
            .collect();
        let emp = Distribution::empirical(lengths.iter()).unwrap();
        let mut geo: Vec<(usize, f64)> = (0..30).map(|m| (m, stationary_length_pmf(&p, m).unwrap())).collect();
        geo.push((30, 0.5f64.powi(30)));
        let geo = Distribution::from_weights(geo).unwrap();
        assert!(total_variation(&emp, &geo) < 0.03);
    }

    #[test]
    fn lambda_epsilon_order_and_size() {
        let p = Tkf91Params::new(1.0, 1.0, 2.0);
        let l = tkf91_lambda_epsilon(&p, 0.3).unwrap();
        let names: Vec<String> = l.iter().map(|(s, _)| s.to_string()).collect();
        assert_eq!(names, ["-", "A", "C", "G", "T"]);

        // lengths up to L carry 1 − r^{L+1}; the set ends within the first
        // length whose inclusion pushes the tail below epsilon
        let l = tkf91_lambda_epsilon(&p, 0.05).unwrap();
        let tail = 1.0 - l.iter().map(|(_, w)| w).sum::<f64>();
        assert!(tail < 0.05);
        let last = l.last().unwrap().1;
        assert!(tail + last >= 0.05);
        assert!(l.windows(2).all(|w| w[0].1 >= w[1].1));
        // all of lengths 0..=3 (tail 1/16) plus enough length-4 sequences
        let full: usize = (0..=3).map(|k| 4usize.pow(k)).sum();
        let per = 0.5 * 0.5f64.powi(4) * 0.25f64.powi(4);
        let extra = ((0.0625 - 0.05) / per).floor() as usize + 1;
        assert_eq!(l.len(), full + extra);

        let mut skew = Tkf91Params::new(1.0, 1.0, 2.0);
        skew.pi_a = 0.7;
        skew.pi_c = 0.1;
        skew.pi_g = 0.1;
        skew.pi_t = 0.1;
        let l = tkf91_lambda_epsilon(&skew, 0.2).unwrap();
        assert_eq!(l[1].0, seq("A"));
        assert_eq!(l[2].0, seq("AA"));
        assert!(l.windows(2).all(|w| w[0].1 >= w[1].1));
    }
}
