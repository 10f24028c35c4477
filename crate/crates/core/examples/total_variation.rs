// Three ways to compute total variation, and the set that attains it.

use rootrecon::distribution::{
    star_norm, total_variation, total_variation_by_overlap, total_variation_by_subsets, tv_achieving_set,
    Distribution,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a = Distribution::from_slice(&[0.5, 0.3, 0.2, 0.0])?;
    let b = Distribution::from_slice(&[0.1, 0.3, 0.2, 0.4])?;
    println!("half L1      {}", total_variation(&a, &b));
    println!("1 - overlap  {}", total_variation_by_overlap(&a, &b));
    println!("max over A   {}", total_variation_by_subsets(&a, &b)?);
    let set = tv_achieving_set(&a, &b, (&0, &1));
    println!("a(A) - b(A) = {}", set.mass_under(&a) - set.mass_under(&b));
    let diff: Vec<f64> = a.to_dense(4).iter().zip(b.to_dense(4)).map(|(x, y)| x - y).collect();
    println!("star norm of a - b = {}", star_norm(&diff));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
