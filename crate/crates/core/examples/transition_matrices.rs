// Transition probabilities by uniformization, checked against the
// two-state closed form.

use rootrecon::ctmc::{identifiability_margin, transition_matrix, RateMatrix, UNIFORMIZATION_TOL};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = RateMatrix::two_state(1.0)?;
    for t in [0.1, 1.0, 5.0] {
        let p = transition_matrix(&q, t, UNIFORMIZATION_TOL)?;
        let closed = (1.0 + (-2.0 * t).exp()) / 2.0;
        println!("t = {t}: p11 = {:.12} (closed form {:.12})", p.get(0, 0), closed);
    }

    let jc = RateMatrix::jukes_cantor(1.0 / 3.0)?;
    let p = transition_matrix(&jc, 1.0, UNIFORMIZATION_TOL)?;
    println!("Jukes-Cantor row 0 at t = 1: {:?}", p.row_slice(0));
    let margin = identifiability_margin(&jc, 1.0, &[0, 1, 2, 3])?;
    println!(
        "min pairwise TV of rows = {margin:.6}, exp(-h ||Q||) = {:.6}",
        (-jc.norm()).exp()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
