// Drive a whole experiment from a TOML config and write its CSV tables.

use rootrecon::experiment::{run, ExperimentConfig};

const CONFIG: &str = r#"
seed = 1
trials = 2000
ks = [20, 80]

[family]
kind = "figure1"
k = 80
height = 1.0

[process]
kind = "two_state"
q = 1.0

[estimator]
kind = "frequency"
epsilon = 0.01
s = 0.05
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    assert!(config.validate().is_empty());
    let outcome = run(&config)?;
    let dir = std::env::temp_dir().join(format!("rootrecon-example-{}", outcome.config_hash));
    outcome.write_to_dir(&dir)?;
    print!("{}", std::fs::read_to_string(dir.join("summary.csv"))?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
