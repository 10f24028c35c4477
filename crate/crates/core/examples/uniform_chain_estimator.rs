// The uniform-chain estimator picks its own candidates from the data.

use rootrecon::bounds::monte_carlo_error;
use rootrecon::ctmc::RateMatrix;
use rootrecon::estimators::{RowCache, UniformChainEstimator};
use rootrecon::family::star;
use rootrecon::rng::{domain, substream};
use rootrecon::treechain::simulate;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = RateMatrix::uniform(4, 0.25)?;
    let tree = star(301, 1.0)?;
    let est = UniformChainEstimator::new(&tree, 0.05, 1.0, q.q_star(), RowCache::new(&q, 1.0, 1, 0))?;
    println!("m = {}, f* = {:.4}", est.plan().m(), est.f_star());
    for root in 0..4 {
        let err = monte_carlo_error(500, root as u64, |t, rng| {
            let leaves = simulate(&tree, &q, &root, rng)?;
            let mut ext = substream(root as u64, domain::EXTENSION, t as u64);
            Ok::<_, rootrecon::error::EstimatorError>(est.estimate(&leaves, &mut ext)?.estimate != root)
        })?;
        println!("root {root}: error {:.4}", err.rate);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
