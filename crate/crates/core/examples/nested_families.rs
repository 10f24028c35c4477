// Generate nested families and look at how boundary counts grow.

use rootrecon::family::FamilySpec;
use rootrecon::tree::big_bang_profile;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        FamilySpec::Star { k: 16, height: 1.0 },
        FamilySpec::PinchedStar { m: 16, s: 0.3, height: 1.0 },
        FamilySpec::Figure1 { k: 15, height: 1.0 },
        FamilySpec::Figure2 { k: 6, heavy: 9, height: 1.0 },
        FamilySpec::RandomUltrametric { k: 16, height: 1.0, seed: 9 },
    ];
    let grid = [0.05, 0.2, 0.6];
    for spec in &specs {
        let family = spec.generate()?;
        let profile = big_bang_profile(&family, &grid)?;
        let last = profile.counts.last().unwrap();
        println!(
            "{:<20} {} trees, boundary counts of the last tree at {:?}: {:?}, flat at {:?}",
            spec.kind_name(),
            family.len(),
            grid,
            last,
            profile.flagged
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
