use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rootrecon::bounds::{recon_lower, recon_upper};
use rootrecon::distribution::Distribution;
use rootrecon::experiment::{self, ExperimentConfig, ExperimentError};
use rootrecon::rng::substream;
use rootrecon::tkf91::{tkf91_evolve, tkf91_lambda_epsilon, Tkf91Params, Tkf91Sequence};

#[derive(Parser)]
#[command(name = "rootrecon", version, about = "Root-state reconstruction experiments on nested tree families")]
struct Cli {
    /// Worker threads for trial execution.
    #[arg(long, global = true, env = "ROOTRECON_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one realization and print its leaves as `leaf,state` CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Family member to use; defaults to the first configured one.
        #[arg(long)]
        k: Option<usize>,
        /// Root state, overriding the configured root law.
        #[arg(long)]
        root: Option<String>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the root from a `leaf,state` CSV.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        leaves: PathBuf,
    },
    /// Print error bounds. Without a config, prints the reconstruction
    /// sandwich for a symmetric binary channel under a uniform prior.
    Bounds {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Flip probability of the binary channel.
        #[arg(long, default_value_t = 0.1)]
        flip: f64,
    },
    /// Run a configured experiment and write trials.csv and summary.csv.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// TKF91 helpers: the candidate set of the stationary law, or one
    /// evolution of a given sequence.
    Tkf91 {
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Evolve this sequence (`-` is empty) instead of listing candidates.
        #[arg(long)]
        evolve: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Failure {
    Config(String),
    Guard(String),
    Other(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else if e.is_guard() {
            Failure::Guard(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

fn other(e: impl std::fmt::Display) -> Failure {
    Failure::Other(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(m)) => {
            eprintln!("guard violation: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::from_file(path).map_err(|e| match e {
        ExperimentError::Io { .. } => Failure::Config(e.to_string()),
        e => e.into(),
    })
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate { config, k, root, out } => {
            let c = load(&config)?;
            let root = match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).map_err(other)?;
                    experiment::simulate_csv(&c, k, root.as_deref(), f)?
                }
                None => experiment::simulate_csv(&c, k, root.as_deref(), io::stdout().lock())?,
            };
            eprintln!("root: {root}");
        }
        Command::Estimate { config, k, leaves } => {
            let c = load(&config)?;
            let f = std::fs::File::open(&leaves).map_err(other)?;
            let e = experiment::estimate_csv(&c, k, f)?;
            println!("estimate: {}", e.estimate);
            println!("fallback: {}", e.fallback);
            if !e.margins.is_empty() {
                println!("margins: {}", e.margins);
            }
        }
        Command::Bounds { config: Some(path), .. } => {
            let c = load(&path)?;
            println!("k,m,bound,raw,valid");
            for (k, m, b) in experiment::bounds_only(&c)? {
                println!("{k},{m},{},{},{}", b.value, b.raw, b.valid);
            }
        }
        Command::Bounds { config: None, flip } => {
            let prior = Distribution::from_slice(&[0.5, 0.5]).map_err(other)?;
            let cond = BTreeMap::from([
                (0usize, Distribution::from_slice(&[1.0 - flip, flip]).map_err(other)?),
                (1, Distribution::from_slice(&[flip, 1.0 - flip]).map_err(other)?),
            ]);
            println!("recon_upper: {}", recon_upper(&prior, &cond).map_err(other)?);
            println!("recon_lower: {}", recon_lower(&prior, &cond, &[0, 1]).map_err(other)?);
        }
        Command::Experiment { config, out } => {
            let c = load(&config)?;
            let outcome = experiment::run(&c)?;
            if let Some(dir) = out.or(c.output.clone()) {
                outcome.write_to_dir(&dir)?;
                eprintln!("wrote {}", dir.display());
            }
            outcome.write_summary_csv(io::stdout().lock()).map_err(other)?;
        }
        Command::Tkf91 {
            nu,
            lambda,
            mu,
            epsilon,
            evolve,
            time,
            seed,
        } => {
            let params = Tkf91Params::new(nu, lambda, mu);
            let v = params.violations();
            if !v.is_empty() {
                return Err(Failure::Config(v.join("; ")));
            }
            let guard = |e: rootrecon::error::ProcessError| match e {
                rootrecon::error::ProcessError::LengthCap { .. } => Failure::Guard(e.to_string()),
                e => other(e),
            };
            match evolve {
                Some(text) => {
                    let x: Tkf91Sequence = text.parse().map_err(other)?;
                    let mut rng = substream(seed, 0, 0);
                    println!("{}", tkf91_evolve(&params, &x, time, &mut rng).map_err(guard)?);
                }
                None => {
                    let mut text = String::from("sequence,mass\n");
                    for (x, p) in tkf91_lambda_epsilon(&params, epsilon).map_err(guard)? {
                        text.push_str(&format!("{x},{p}\n"));
                    }
                    // the list can be long; a closed pipe just ends it
                    match io::stdout().lock().write_all(text.as_bytes()) {
                        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(other(e)),
                        _ => {}
                    }
                }
            }
        }
        Command::Validate { config } => {
            let c = load(&config)?;
            let v = c.validate();
            if !v.is_empty() {
                for line in &v {
                    println!("{line}");
                }
                return Err(Failure::Config(format!("{} violation(s)", v.len())));
            }
            println!("ok");
        }
    }
    Ok(())
}
