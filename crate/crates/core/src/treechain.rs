//! Markov chains running down a tree: forward simulation of leaf states and
//! exact leaf laws on small trees.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;

use crate::ctmc::{transition_matrix, GenerativeProcess, RateMatrix, UNIFORMIZATION_TOL};
use crate::distribution::{total_variation, Distribution};
use crate::error::ProcessError;
use crate::tree::Tree;

/// Largest number of joint leaf outcomes an exact law may range over.
pub const EXACT_LAW_GUARD: f64 = 1e6;

/// States observed at the leaves of one realization, keyed by leaf name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafAssignment<S> {
    states: BTreeMap<String, S>,
}

impl<S: Clone + Ord> LeafAssignment<S> {
    pub fn new(states: BTreeMap<String, S>) -> Self {
        LeafAssignment { states }
    }

    pub fn get(&self, leaf: &str) -> Option<&S> {
        self.states.get(leaf)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &S)> + '_ {
        self.states.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Leaf states in leaf-name order.
    pub fn values(&self) -> impl Iterator<Item = &S> + '_ {
        self.states.values()
    }

    /// Number of leaves in each observed state.
    pub fn counts(&self) -> BTreeMap<S, usize> {
        let mut out = BTreeMap::new();
        for s in self.states.values() {
            *out.entry(s.clone()).or_insert(0) += 1;
        }
        out
    }

    /// The states at the given leaves, in the given order.
    pub fn select<N: AsRef<str>>(&self, leaves: &[N]) -> Result<Vec<S>, ProcessError> {
        leaves
            .iter()
            .map(|l| {
                self.states
                    .get(l.as_ref())
                    .cloned()
                    .ok_or_else(|| ProcessError::MissingLeaf(l.as_ref().to_owned()))
            })
            .collect()
    }

    pub fn into_inner(self) -> BTreeMap<String, S> {
        self.states
    }
}

impl<S: Display> LeafAssignment<S> {
    /// Writes `leaf,state` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["leaf", "state"])?;
        for (leaf, s) in &self.states {
            out.write_record([leaf.as_str(), &s.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl<S: FromStr + Clone + Ord> LeafAssignment<S> {
    /// Reads the format written by [`LeafAssignment::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self, ProcessError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut states = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| ProcessError::InvalidDistribution(e.to_string()))?;
            if rec.len() != 2 {
                return Err(ProcessError::InvalidDistribution(format!(
                    "expected `leaf,state`, got {} fields",
                    rec.len()
                )));
            }
            let state = rec[1].trim().parse::<S>().map_err(|_| {
                ProcessError::InvalidDistribution(format!("bad state `{}`", &rec[1]))
            })?;
            states.insert(rec[0].trim().to_owned(), state);
        }
        Ok(LeafAssignment { states })
    }
}

/// Samples leaf states by running `process` along every edge from the root
/// state. Edges are visited in preorder so the draw sequence is fixed by
/// the tree.
pub fn simulate<P: GenerativeProcess, R: Rng + ?Sized>(
    tree: &Tree,
    process: &P,
    root_state: &P::State,
    rng: &mut R,
) -> Result<LeafAssignment<P::State>, ProcessError> {
    let mut states: Vec<Option<P::State>> = vec![None; tree.vertex_count()];
    states[tree.root()] = Some(root_state.clone());
    let mut out = BTreeMap::new();
    for v in tree.preorder() {
        if let Some(p) = tree.parent(v) {
            let parent_state = states[p].as_ref().expect("preorder visits parents first");
            states[v] = Some(process.sample(parent_state, tree.length(v), rng)?);
        }
        if tree.is_leaf(v) {
            let name = tree.name(v).expect("leaves are named").to_owned();
            out.insert(name, states[v].clone().expect("state set above"));
        }
    }
    Ok(LeafAssignment { states: out })
}

/// Exact joint law of the leaf states. Outcomes are state tuples in
/// leaf-name order.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafLaw {
    pub leaves: Vec<String>,
    pub law: Distribution<Vec<usize>>,
}

impl LeafLaw {
    pub fn probability(&self, outcome: &[usize]) -> f64 {
        self.law.mass(&outcome.to_vec())
    }

    /// Marginal law at one leaf.
    pub fn marginal(&self, leaf: &str) -> Result<Distribution<usize>, ProcessError> {
        let idx = self
            .leaves
            .iter()
            .position(|l| l == leaf)
            .ok_or_else(|| ProcessError::MissingLeaf(leaf.to_owned()))?;
        Distribution::from_weights(self.law.iter().map(|(o, p)| (o[idx], p)))
    }
}

fn guard(tree: &Tree, q: &RateMatrix) -> Result<(), ProcessError> {
    let outcomes = (q.n() as f64).powi(tree.leaf_count() as i32);
    if outcomes > EXACT_LAW_GUARD {
        return Err(ProcessError::SizeGuard {
            outcomes,
            guard: EXACT_LAW_GUARD,
        });
    }
    Ok(())
}

/// Conditional law of a subtree's leaves given its top state; tuples follow
/// the order of `leaf_ids`.
struct SubtreeLaw {
    leaf_ids: Vec<usize>,
    by_state: Vec<BTreeMap<Vec<usize>, f64>>,
}

/// Exact leaf law by summing internal states out bottom-up.
pub fn exact_leaf_law(tree: &Tree, q: &RateMatrix, root_state: usize) -> Result<LeafLaw, ProcessError> {
    guard(tree, q)?;
    if root_state >= q.n() {
        return Err(ProcessError::StateOutOfRange(root_state));
    }
    let n = q.n();
    let names: Vec<String> = tree.leaf_names().map(str::to_owned).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let mut laws: Vec<Option<SubtreeLaw>> = (0..tree.vertex_count()).map(|_| None).collect();
    for &v in tree.preorder().iter().rev() {
        let law = if tree.is_leaf(v) {
            SubtreeLaw {
                leaf_ids: vec![index[tree.name(v).expect("leaves are named")]],
                by_state: (0..n).map(|a| BTreeMap::from([(vec![a], 1.0)])).collect(),
            }
        } else {
            let mut acc = SubtreeLaw {
                leaf_ids: Vec::new(),
                by_state: vec![BTreeMap::from([(Vec::new(), 1.0)]); n],
            };
            for &c in tree.children(v) {
                let child = laws[c].take().expect("children are finished first");
                let p = transition_matrix(q, tree.length(c), UNIFORMIZATION_TOL)?;
                for a in 0..n {
                    let mut msg: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
                    for b in 0..n {
                        let pab = p.get(a, b);
                        if pab == 0.0 {
                            continue;
                        }
                        for (o, w) in &child.by_state[b] {
                            *msg.entry(o.clone()).or_insert(0.0) += pab * w;
                        }
                    }
                    let mut joined = BTreeMap::new();
                    for (left, wl) in &acc.by_state[a] {
                        for (right, wr) in &msg {
                            let mut o = left.clone();
                            o.extend_from_slice(right);
                            *joined.entry(o).or_insert(0.0) += wl * wr;
                        }
                    }
                    acc.by_state[a] = joined;
                }
                acc.leaf_ids.extend(child.leaf_ids);
            }
            acc
        };
        laws[v] = Some(law);
    }

    let root = laws[tree.root()].take().expect("root is finished last");
    let mut slots = vec![0usize; root.leaf_ids.len()];
    for (pos, &id) in root.leaf_ids.iter().enumerate() {
        slots[id] = pos;
    }
    let law = root.by_state[root_state]
        .iter()
        .map(|(o, &w)| (slots.iter().map(|&pos| o[pos]).collect::<Vec<_>>(), w))
        .collect::<BTreeMap<_, _>>();
    Ok(LeafLaw {
        leaves: names,
        law: Distribution::with_tolerance(law, 1e-10)?,
    })
}

/// Total variation between the exact leaf laws for root states `i` and `j`.
pub fn exact_leaf_tv(tree: &Tree, q: &RateMatrix, i: usize, j: usize) -> Result<f64, ProcessError> {
    let a = exact_leaf_law(tree, q, i)?;
    if i == j {
        return Ok(0.0);
    }
    let b = exact_leaf_law(tree, q, j)?;
    Ok(total_variation(&a.law, &b.law))
}
