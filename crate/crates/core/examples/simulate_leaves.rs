// Run a chain down a tree and write the leaf states as CSV.

use rootrecon::ctmc::RateMatrix;
use rootrecon::family::figure1;
use rootrecon::rng::substream;
use rootrecon::treechain::simulate;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = figure1(6, 1.0)?;
    let q = RateMatrix::jukes_cantor(0.5)?;
    let mut rng = substream(42, 0, 0);
    let leaves = simulate(&tree, &q, &2, &mut rng)?;
    let mut out = Vec::new();
    leaves.write_csv(&mut out)?;
    print!("{}", String::from_utf8(out)?);
    println!("state counts: {:?}", leaves.counts());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
