use std::path::Path;
use std::process::{Command, Output};

const SIMULATE: &str = r#"experiment = "simulate"
n = 32
dt = 1e-4
t_final = 0.01
samples = 10
tau = 1.0

[initial]
profile = "cosine_perturbation"
amplitude = 0.1
"#;

fn qhdrelax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhdrelax")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_succeeds_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SIMULATE);
    let out = dir.path().join("out");
    let res = qhdrelax(&["simulate", "--config", &config, "--out", out.to_str().unwrap(), "--assert"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["config.toml", "run.csv", "energy.dat", "summary.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let printed: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(printed, saved);
}

#[test]
fn output_key_in_config_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_config");
    let text = format!("output = {:?}\n{SIMULATE}", out.to_str().unwrap());
    let config = write_config(dir.path(), &text);
    assert_eq!(qhdrelax(&["simulate", "--config", &config]).status.code(), Some(0));
    assert!(out.join("summary.json").is_file());
}

#[test]
fn configuration_problems_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let missing = dir.path().join("absent.toml");
    assert_eq!(qhdrelax(&["simulate", "--config", missing.to_str().unwrap(), "--out", out]).status.code(), Some(1));

    let config = write_config(dir.path(), &SIMULATE.replace("n = 32", "n = 7"));
    assert_eq!(qhdrelax(&["simulate", "--config", &config, "--out", out]).status.code(), Some(1));

    let config = write_config(dir.path(), SIMULATE);
    assert_eq!(qhdrelax(&["decay", "--config", &config, "--out", out]).status.code(), Some(1));
    assert_eq!(qhdrelax(&["simulate", "--config", &config]).status.code(), Some(1));
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // Density dips to 0.02, below the floor.
    let text = format!("floor = 0.1\n{}", SIMULATE.replace("amplitude = 0.1", "amplitude = 0.98"));
    let config = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let res = qhdrelax(&["simulate", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn failed_flag_with_assert_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // A zero energy tolerance cannot be met.
    let config = write_config(dir.path(), &format!("mass_tol = 0.0\nenergy_tol = 0.0\n{SIMULATE}"));
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let res = qhdrelax(&["simulate", "--config", &config, "--out", out, "--assert"]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(Path::new(out).join("summary.json").is_file());
    assert_eq!(qhdrelax(&["simulate", "--config", &config, "--out", out]).status.code(), Some(0));
}
