use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rootrecon"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rootrecon-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = r#"
seed = 3
trials = 200
ks = [4, 8]

[family]
kind = "figure1"
k = 8
height = 1.0

[process]
kind = "two_state"
q = 1.0

[estimator]
kind = "frequency"
s = 0.05
"#;

#[test]
fn binary_channel_sandwich() {
    let o = run(bin().arg("bounds"));
    assert!(o.status.success());
    assert_eq!(stdout(&o), "recon_upper: 0.9\nrecon_lower: 0.8\n");
}

#[test]
fn validate_ok_and_violations() {
    let dir = scratch("validate");
    let good = write_config(&dir, SMALL);
    let o = run(bin().args(["validate", "--config"]).arg(&good));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "ok");

    let bad = write_config(
        &dir,
        r#"
seed = 1
trials = 10
[family]
kind = "figure1"
k = 4
height = 1.0
[process]
kind = "tkf91"
nu = 1.0
lambda = 2.0
mu = 2.0
[estimator]
kind = "frequency"
s = 0.0
"#,
    );
    let o = run(bin().args(["validate", "--config"]).arg(&bad));
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("lambda must be < mu"), "{out}");
    assert!(out.lines().count() >= 2, "every violation listed: {out}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = scratch("unknown");
    let path = write_config(&dir, &SMALL.replace("q = 1.0", "rat = 1.0"));
    let o = run(bin().args(["experiment", "--config"]).arg(&path));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_is_a_config_error() {
    let o = run(bin().args(["validate", "--config", "/nonexistent/rootrecon.toml"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exact_law_guard_exits_3() {
    let dir = scratch("guard");
    let path = write_config(
        &dir,
        &SMALL
            .replace("ks = [4, 8]", "ks = [200]")
            .replace("k = 8", "k = 200")
            .replace("\"frequency\"", "\"map\""),
    );
    let o = run(bin().args(["experiment", "--config"]).arg(&path));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn experiment_is_thread_count_independent() {
    let dir = scratch("threads");
    let path = write_config(&dir, SMALL);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.join(format!("t{threads}"));
        let o = run(bin()
            .args(["experiment", "--threads", threads, "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            fs::read(out.join("trials.csv")).unwrap(),
            fs::read(out.join("summary.csv")).unwrap(),
            stdout(&o),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].2.starts_with("config_hash,k,m,s,trials,errors,empirical"));
    assert_eq!(outputs[0].2.lines().count(), 3);
}

#[test]
fn simulate_then_estimate_round_trip() {
    let dir = scratch("roundtrip");
    let path = write_config(&dir, &SMALL.replace("q = 1.0", "q = 0.0"));
    let leaves = dir.join("leaves.csv");
    let o = run(bin()
        .args(["simulate", "--k", "8", "--root", "1", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&leaves));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&leaves).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",1")));
    let o = run(bin().args(["estimate", "--k", "8", "--config"]).arg(&path).arg("--leaves").arg(&leaves));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("estimate: 1\n"));
}

#[test]
fn bounds_from_config() {
    let dir = scratch("bounds");
    let path = write_config(&dir, SMALL);
    let o = run(bin().args(["bounds", "--config"]).arg(&path));
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,m,bound,raw,valid"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn tkf91_candidates_and_params() {
    let o = run(bin().args(["tkf91", "--epsilon", "0.3"]));
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("sequence,mass"));
    assert_eq!(out.lines().nth(1), Some("-,0.5"));

    let o = run(bin().args(["tkf91", "--lambda", "2", "--mu", "2"]));
    assert_eq!(o.status.code(), Some(2));

    let o = run(bin().args(["tkf91", "--evolve", "ACGT", "--time", "0"]));
    assert_eq!(stdout(&o).trim(), "ACGT");
}
