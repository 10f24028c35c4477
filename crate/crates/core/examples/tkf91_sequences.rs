// The TKF91 insertion-deletion process: stationary law, evolution, and the
// most likely stationary sequences.

use rootrecon::rng::substream;
use rootrecon::tkf91::{stationary_length_pmf, stationary_sample, tkf91_evolve, tkf91_lambda_epsilon, Tkf91Params};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = Tkf91Params::new(1.0, 1.0, 2.0);
    let mut rng = substream(3, 0, 0);
    let n = 20_000;
    let mut lengths = [0usize; 6];
    for _ in 0..n {
        let x = stationary_sample(&params, &mut rng)?;
        let y = tkf91_evolve(&params, &x, 1.0, &mut rng)?;
        if y.len() < lengths.len() {
            lengths[y.len()] += 1;
        }
    }
    for (len, c) in lengths.iter().enumerate() {
        println!(
            "length {len}: after t = 1 {:.4}, stationary {:.4}",
            *c as f64 / n as f64,
            stationary_length_pmf(&params, len)?
        );
    }
    let top = tkf91_lambda_epsilon(&params, 0.2)?;
    println!("{} sequences carry 80% of the stationary mass; first few:", top.len());
    for (x, p) in top.iter().take(6) {
        println!("  {x:<4} {p:.5}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
