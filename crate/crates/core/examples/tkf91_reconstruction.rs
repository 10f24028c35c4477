// Reconstructing a TKF91 root sequence on growing Figure-1 trees.

use rootrecon::family::FamilySpec;
use rootrecon::tkf91::{Tkf91Experiment, Tkf91Params};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let exp = Tkf91Experiment {
        params: Tkf91Params::new(1.0, 0.5, 1.0),
        s: 0.05,
        h_star: 1.0,
        epsilon: 0.3,
        trials: 1000,
        row_samples: 20_000,
        seed: 11,
    };
    let family = FamilySpec::Figure1 { k: 100, height: 1.0 };
    for row in exp.run(&family, &[10, 100])? {
        println!(
            "k = {:>3}  m = {:>3}  |candidates| = {}  error {:.3}  fallbacks {}",
            row.k, row.m, row.lambda_size, row.error.rate, row.fallbacks
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
