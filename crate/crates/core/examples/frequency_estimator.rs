// The frequency-test estimator on the Figure-1 family: error falls as the
// family grows.

use std::collections::BTreeMap;
use std::sync::Arc;

use rootrecon::bounds::monte_carlo_error;
use rootrecon::ctmc::{transition_matrix, RateMatrix, UNIFORMIZATION_TOL};
use rootrecon::estimators::FrequencyEstimator;
use rootrecon::family::figure1;
use rootrecon::rng::{domain, substream};
use rootrecon::treechain::simulate;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = RateMatrix::two_state(1.0)?;
    let p = transition_matrix(&q, 1.0, UNIFORMIZATION_TOL)?;
    let rows: BTreeMap<usize, _> = (0..2).map(|i| (i, Arc::new(p.row(i)))).collect();
    for k in [10, 40, 160] {
        let tree = figure1(k, 1.0)?;
        let est = FrequencyEstimator::new(&tree, 0.05, 1.0, &[0, 1], &rows)?;
        let err = monte_carlo_error(4000, 1, |t, rng| {
            let root = t % 2;
            let leaves = simulate(&tree, &q, &root, rng)?;
            let mut ext = substream(1, domain::EXTENSION, t as u64);
            Ok::<_, rootrecon::error::EstimatorError>(est.estimate(&q, &leaves, &mut ext)?.estimate != root)
        })?;
        println!("k = {k:>3}  m = {:>3}  error {:.4}", est.plan().m(), err.rate);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
