// Parse a tree, measure it, and cut it down to a well-spread restriction.

use rootrecon::newick::{parse_newick, to_newick};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = parse_newick("((a:0.5,b:0.5):0.25,(c:0.1,d:0.1):0.65,e:0.75);")?;
    println!("height {}  leaves {}", tree.height(), tree.leaf_count());
    println!("shared path a,b = {}", tree.shared_path_length("a", "b")?);
    println!("spread = {:.4}", tree.spread()?);

    for s in [0.1, 0.3, 0.7] {
        let w = tree.extract_well_spread_restriction(s)?;
        println!(
            "s = {s}: {} boundary points, restriction {} (spread {:.4})",
            tree.boundary_count(s)?,
            to_newick(&w),
            w.spread()?
        );
    }

    let stretched = tree.restrict(&["a", "c"])?.stretch_to_height(2.0)?;
    println!("a,c stretched to height 2: {}", to_newick(&stretched));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
