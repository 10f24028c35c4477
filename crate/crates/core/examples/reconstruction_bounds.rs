// Upper and lower bounds on the best success probability, and the explicit
// error bounds for the frequency and uniform-chain estimators.

use std::collections::BTreeMap;

use rootrecon::bounds::{prop54_uniform_bound, recon_lower, recon_upper, thm2_general_bound, BoundInputs};
use rootrecon::distribution::Distribution;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let prior = Distribution::from_slice(&[0.5, 0.5])?;
    let cond = BTreeMap::from([
        (0, Distribution::from_slice(&[0.9, 0.1])?),
        (1, Distribution::from_slice(&[0.1, 0.9])?),
    ]);
    println!("binary symmetric channel, flip 0.1:");
    println!("  success <= {}", recon_upper(&prior, &cond)?);
    println!("  success >= {}", recon_lower(&prior, &cond, &[0, 1])?);

    for m in [100, 10_000, 1_000_000] {
        let b = thm2_general_bound(&BoundInputs {
            epsilon: 0.01,
            n_epsilon: 2,
            delta_epsilon: 0.9,
            q_star: 1.0,
            s: 1e-4,
            m,
            ..Default::default()
        })?;
        println!("frequency bound, m = {m}: {:.4} (raw {:.4}, valid {})", b.value, b.raw, b.valid);
    }
    let b = prop54_uniform_bound(&BoundInputs {
        q_star: 1.0,
        s: 1e-5,
        m: 1_000_000,
        f_star: 0.9,
        delta_q_hstar: 0.9,
        ..Default::default()
    })?;
    println!("uniform-chain bound: {:.4}", b.value);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
