#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rootrecon::ctmc::RateMatrix;
use rootrecon::distribution::Distribution;
use rootrecon::tree::{Tree, TreeBuilder};

fn edge<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.05..1.2)
}

/// Random rooted tree with leaves `l0..`, not necessarily ultrametric. New
/// leaves either hang from the root or branch off the edge above an
/// existing vertex.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, leaves: usize) -> Tree {
    let mut b = TreeBuilder::new();
    let mut vertices = vec![b.add_child(0, Some("l0"), edge(rng)).unwrap()];
    for i in 1..leaves {
        let name = format!("l{i}");
        let parent = if rng.random_bool(0.25) {
            0
        } else {
            let target = vertices[rng.random_range(0..vertices.len())];
            let off = b.length(target) * rng.random_range(0.1..0.9);
            let v = b.split_edge(target, off, None).unwrap();
            vertices.push(v);
            v
        };
        vertices.push(b.add_child(parent, Some(&name), edge(rng)).unwrap());
    }
    b.build().unwrap()
}

pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, n: usize, max_rate: f64) -> RateMatrix {
    RateMatrix::random(n, max_rate, rng).unwrap()
}

/// Positive weights normalized to one.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Weights on a random subset of `0..n`, at least one state kept.
pub fn random_sparse<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.6) { rng.random_range(0.0..1.0) } else { 0.0 })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn dist(v: &[f64]) -> Distribution<usize> {
    Distribution::from_slice(v).unwrap()
}

/// Best success probability over every map `Y1 -> Y0`, by enumerating all
/// `n0^n1` of them. `cond[i][y]` is the law of `Y1` given `Y0 = i`.
pub fn best_success_by_enumeration(prior: &[f64], cond: &[Vec<f64>]) -> f64 {
    let n0 = prior.len();
    let n1 = cond[0].len();
    let mut f = vec![0usize; n1];
    let mut best = f64::NEG_INFINITY;
    loop {
        let p: f64 = (0..n1).map(|y| prior[f[y]] * cond[f[y]][y]).sum();
        best = best.max(p);
        // next map in base-n0 counting order
        let mut pos = 0;
        loop {
            if pos == n1 {
                return best;
            }
            f[pos] += 1;
            if f[pos] < n0 {
                break;
            }
            f[pos] = 0;
            pos += 1;
        }
    }
}

pub fn cond_map(cond: &[Vec<f64>]) -> BTreeMap<usize, Distribution<usize>> {
    cond.iter().enumerate().map(|(i, row)| (i, dist(row))).collect()
}
