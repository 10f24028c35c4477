// Majority vote on the two-state pinched star: exact error, Hoeffding
// bound, and simulation.

use rootrecon::bounds::{majority_exact_error, majority_hoeffding_bound, monte_carlo_error};
use rootrecon::ctmc::RateMatrix;
use rootrecon::estimators::majority_estimate;
use rootrecon::family::pinched_star;
use rootrecon::treechain::simulate;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (m, q, s, h) = (101, 1.0, 0.05, 1.0);
    let tree = pinched_star(m, s, h)?;
    let chain = RateMatrix::two_state(q)?;
    let err = monte_carlo_error(20_000, 4, |t, rng| {
        let root = t % 2;
        let leaves = simulate(&tree, &chain, &root, rng)?;
        Ok::<_, rootrecon::error::EstimatorError>(majority_estimate(&leaves)? != root)
    })?;
    println!("exact     {:.5}", majority_exact_error(m, q, s, h)?);
    println!("simulated {:.5}  [{:.5}, {:.5}]", err.rate, err.ci_low, err.ci_high);
    println!("Hoeffding {:.5}", majority_hoeffding_bound(m, q, s, h));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
