//! Sparse probability mass functions, total variation, and the weighted
//! `‖·‖_*` norm.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use crate::error::ProcessError;

/// Mass deviation from 1 that is silently renormalized.
pub const MASS_TOL: f64 = 1e-12;

/// A probability mass function with finite support over an ordered state
/// type. Zero masses are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S: Ord> {
    masses: BTreeMap<S, f64>,
}

impl<S: Ord + Clone + Debug> Distribution<S> {
    /// Validates and, if the total is within [`MASS_TOL`] of 1, renormalizes.
    pub fn new(masses: BTreeMap<S, f64>) -> Result<Self, ProcessError> {
        Self::with_tolerance(masses, MASS_TOL)
    }

    /// As [`Distribution::new`] with a caller-chosen mass tolerance.
    pub fn with_tolerance(masses: BTreeMap<S, f64>, tol: f64) -> Result<Self, ProcessError> {
        let mut total = 0.0;
        for (s, &p) in &masses {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(ProcessError::InvalidDistribution(format!(
                    "mass {p} at {s:?}"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > tol {
            return Err(ProcessError::InvalidDistribution(format!(
                "masses sum to {total}"
            )));
        }
        Ok(Distribution {
            masses: masses
                .into_iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(s, p)| (s, p / total))
                .collect(),
        })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_weights(weights: impl IntoIterator<Item = (S, f64)>) -> Result<Self, ProcessError> {
        let mut masses: BTreeMap<S, f64> = BTreeMap::new();
        for (s, w) in weights {
            *masses.entry(s).or_insert(0.0) += w;
        }
        let total: f64 = masses.values().sum();
        if !(total > 0.0 && total.is_finite()) || masses.values().any(|w| *w < 0.0) {
            return Err(ProcessError::InvalidDistribution(
                "weights must be nonnegative with a positive total".into(),
            ));
        }
        for w in masses.values_mut() {
            *w /= total;
        }
        Self::new(masses)
    }

    /// Empirical law of the given samples.
    pub fn empirical<'a>(samples: impl IntoIterator<Item = &'a S>) -> Result<Self, ProcessError>
    where
        S: 'a,
    {
        Self::from_weights(samples.into_iter().map(|s| (s.clone(), 1.0)))
    }

    pub fn point(s: S) -> Self {
        Distribution {
            masses: BTreeMap::from([(s, 1.0)]),
        }
    }

    pub fn mass(&self, s: &S) -> f64 {
        self.masses.get(s).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = &S> + '_ {
        self.masses.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> + '_ {
        self.masses.iter().map(|(s, p)| (s, *p))
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Mass of the states accepted by `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&S) -> bool) -> f64 {
        self.masses
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, p)| *p)
            .sum()
    }
}

impl Distribution<usize> {
    /// Dense law over `0..n` from a slice of masses.
    pub fn from_slice(masses: &[f64]) -> Result<Self, ProcessError> {
        Self::new(masses.iter().copied().enumerate().collect())
    }

    /// Dense vector of length `n`.
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (&s, p) in &self.masses {
            if s < n {
                v[s] = *p;
            }
        }
        v
    }
}

fn union_support<'a, S: Ord + Clone + Debug>(
    a: &'a Distribution<S>,
    b: &'a Distribution<S>,
) -> BTreeSet<&'a S> {
    a.support().chain(b.support()).collect()
}

/// `½ Σ |a(σ) − b(σ)|`.
pub fn total_variation<S: Ord + Clone + Debug>(a: &Distribution<S>, b: &Distribution<S>) -> f64 {
    let half: f64 = union_support(a, b)
        .into_iter()
        .map(|s| (a.mass(s) - b.mass(s)).abs())
        .sum::<f64>()
        / 2.0;
    half.clamp(0.0, 1.0)
}

/// `1 − Σ min(a(σ), b(σ))`.
pub fn total_variation_by_overlap<S: Ord + Clone + Debug>(
    a: &Distribution<S>,
    b: &Distribution<S>,
) -> f64 {
    let overlap: f64 = a.iter().map(|(s, p)| p.min(b.mass(s))).sum();
    (1.0 - overlap).clamp(0.0, 1.0)
}

/// `sup_A |a(A) − b(A)|` by enumerating every subset of the joint support.
/// Exponential; supports above 20 states are rejected.
pub fn total_variation_by_subsets<S: Ord + Clone + Debug>(
    a: &Distribution<S>,
    b: &Distribution<S>,
) -> Result<f64, ProcessError> {
    let states: Vec<&S> = union_support(a, b).into_iter().collect();
    if states.len() > 20 {
        return Err(ProcessError::SizeGuard {
            outcomes: 2f64.powi(states.len() as i32),
            guard: 2f64.powi(20),
        });
    }
    let diffs: Vec<f64> = states.iter().map(|s| a.mass(s) - b.mass(s)).collect();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1u32 << diffs.len()) {
        let gap: f64 = diffs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, d)| d)
            .sum();
        best = best.max(gap.abs());
    }
    Ok(best)
}

/// A state set achieving the total variation between two laws.
///
/// `members` lists the included states of the joint support; every state
/// outside the joint support (where both masses are zero) is included iff
/// `includes_outside` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct AchievingSet<S: Ord> {
    pub members: BTreeSet<S>,
    pub includes_outside: bool,
    support: BTreeSet<S>,
}

impl<S: Ord + Clone + Debug> AchievingSet<S> {
    pub fn contains(&self, s: &S) -> bool {
        if self.support.contains(s) {
            self.members.contains(s)
        } else {
            self.includes_outside
        }
    }

    pub fn mass_under(&self, d: &Distribution<S>) -> f64 {
        d.mass_where(|s| self.contains(s))
    }
}

/// `{σ : a(σ) > b(σ)}` plus the tied states when `orientation.0 <
/// orientation.1`. Swapping `a`, `b` and the orientation yields exactly the
/// complement, and `a(A) − b(A)` equals the total variation.
pub fn tv_achieving_set<S: Ord + Clone + Debug, L: Ord>(
    a: &Distribution<S>,
    b: &Distribution<S>,
    orientation: (&L, &L),
) -> AchievingSet<S> {
    let take_ties = orientation.0 < orientation.1;
    let support: BTreeSet<S> = union_support(a, b).into_iter().cloned().collect();
    let members = support
        .iter()
        .filter(|s| {
            let (x, y) = (a.mass(s), b.mass(s));
            x > y || (x == y && take_ties)
        })
        .cloned()
        .collect();
    AchievingSet {
        members,
        includes_outside: take_ties,
        support,
    }
}

/// `Σ_i 2^{-i} |v_i|` with 1-based `i`.
pub fn star_norm(v: &[f64]) -> f64 {
    let mut w = 1.0;
    v.iter()
        .map(|x| {
            w *= 0.5;
            w * x.abs()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> Distribution<usize> {
        Distribution::from_slice(v).unwrap()
    }

    #[test]
    fn tv_examples() {
        let a = d(&[0.9, 0.1]);
        let b = d(&[0.1, 0.9]);
        assert_eq!(total_variation(&a, &a), 0.0);
        assert_eq!(total_variation(&Distribution::point(0), &Distribution::point(1)), 1.0);
        assert!((total_variation(&a, &b) - 0.8).abs() < 1e-15);
        assert!((total_variation_by_overlap(&a, &b) - 0.8).abs() < 1e-15);
        assert!((total_variation_by_subsets(&a, &b).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn achieving_set_examples() {
        let a = d(&[0.75, 0.25]);
        let b = d(&[0.25, 0.75]);
        let set = tv_achieving_set(&a, &b, (&0, &1));
        assert_eq!(set.members, BTreeSet::from([0]));
        assert!((set.mass_under(&a) - set.mass_under(&b) - 0.5).abs() < 1e-15);

        let same = tv_achieving_set(&a, &a, (&0, &1));
        assert_eq!(same.members, BTreeSet::from([0, 1]));
        let same_rev = tv_achieving_set(&a, &a, (&1, &0));
        assert!(same_rev.members.is_empty());

        let a = d(&[0.5, 0.3, 0.2]);
        let b = d(&[0.2, 0.3, 0.5]);
        let set = tv_achieving_set(&a, &b, (&0, &1));
        assert_eq!(set.members, BTreeSet::from([0, 1]));
        let gap = set.mass_under(&a) - set.mass_under(&b);
        assert!((gap - 0.3).abs() < 1e-15);
        assert!((gap - total_variation(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn achieving_sets_are_complementary() {
        let a = d(&[0.4, 0.2, 0.2, 0.2]);
        let b = Distribution::from_slice(&[0.1, 0.2, 0.0, 0.3, 0.4]).unwrap();
        let fwd = tv_achieving_set(&a, &b, (&3, &7));
        let back = tv_achieving_set(&b, &a, (&7, &3));
        for s in 0..8usize {
            assert_ne!(fwd.contains(&s), back.contains(&s), "state {s}");
        }
    }

    #[test]
    fn star_norm_examples() {
        assert_eq!(star_norm(&[1.0, 0.0, 0.0]), 0.5);
        assert_eq!(star_norm(&[0.0, 1.0]), 0.25);
        let e2 = (-2.0f64).exp();
        let row1 = [(1.0 + e2) / 2.0, (1.0 - e2) / 2.0];
        let row2 = [(1.0 - e2) / 2.0, (1.0 + e2) / 2.0];
        let diff: Vec<f64> = row1.iter().zip(&row2).map(|(x, y)| x - y).collect();
        assert!((star_norm(&diff) - 0.75 * e2).abs() < 1e-15);
        assert!(star_norm(&diff) <= total_variation(&d(&row1), &d(&row2)));
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(Distribution::from_slice(&[0.5, 0.4]).is_err());
        assert!(Distribution::from_slice(&[1.5, -0.5]).is_err());
        let near = Distribution::from_slice(&[0.5, 0.5 + 5e-13]).unwrap();
        assert!((near.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
