// Exact leaf distributions by pruning, and how far apart they are for
// different root states.

use rootrecon::ctmc::RateMatrix;
use rootrecon::family::figure1;
use rootrecon::treechain::{exact_leaf_law, exact_leaf_tv};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = RateMatrix::two_state(1.0)?;
    let small = figure1(2, 1.0)?;
    let law = exact_leaf_law(&small, &q, 0)?;
    println!("leaves {:?}", law.leaves);
    for (outcome, p) in law.law.iter() {
        println!("  {outcome:?}: {p:.6}");
    }
    for k in [1, 4, 8, 12] {
        let t = figure1(k, 1.0)?;
        println!("figure1({k}): TV between roots 0 and 1 = {:.6}", exact_leaf_tv(&t, &q, 0, 1)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
