// Bayes-optimal root estimation on a small tree with exact likelihoods.

use std::collections::BTreeMap;

use rootrecon::bounds::monte_carlo_error;
use rootrecon::ctmc::RateMatrix;
use rootrecon::distribution::Distribution;
use rootrecon::estimators::map_estimate;
use rootrecon::newick::parse_newick;
use rootrecon::treechain::{exact_leaf_law, simulate};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_newick("((a:0.6,b:0.6):0.4,(c:0.9,d:0.9):0.1,e:1);")?;
    let q = RateMatrix::uniform(3, 0.5)?;
    let prior = Distribution::from_slice(&[0.5, 0.3, 0.2])?;
    let laws: BTreeMap<usize, _> = (0..3).map(|i| Ok((i, exact_leaf_law(&tree, &q, i)?))).collect::<Result<_, rootrecon::error::ProcessError>>()?;

    let err = monte_carlo_error(20_000, 5, |_, rng| {
        let u: f64 = rand::Rng::random(rng);
        let root = if u < 0.5 { 0 } else if u < 0.8 { 1 } else { 2 };
        let leaves = simulate(&tree, &q, &root, rng)?;
        Ok::<_, rootrecon::error::EstimatorError>(map_estimate(&laws, &prior, &leaves)? != root)
    })?;
    println!("MAP error {:.4}, 99% CI [{:.4}, {:.4}]", err.rate, err.ci_low, err.ci_high);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
