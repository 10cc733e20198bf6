//! End-to-end CLI behavior: subcommands, exit codes and output determinism.

use std::path::Path;
use std::process::Command;

fn nqovi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nqovi"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Regret CSV with the wall-clock column removed.
fn strip_wall(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map(|(head, _)| head).unwrap_or(l).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn generate_then_run_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let status = nqovi()
        .args(["generate", "--gen", "d=6,S=3,A=2x2,H=2,n=2", "--seed", "5"])
        .arg("--out")
        .arg(&model)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let out = dir.path().join("run");
    let status = nqovi()
        .args(["run", "--episodes", "20", "--c-beta", "0.2", "--seed", "1"])
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&out)
        .args(["--audits", "deterministic"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let csv = read(&out.join("regret_seed1.csv"));
    assert_eq!(csv.lines().count(), 1 + 20);
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .starts_with("episode,nash_gap,cum_regret,max_bonus,stage_solver_max_eps,wall_ms"));

    let status = nqovi()
        .args(["audit", "--audits", "weight_bound,elliptical"])
        .arg("--record")
        .arg(out.join("record_seed1.json"))
        .arg("--model")
        .arg(&model)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn run_outputs_are_deterministic_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let status = nqovi()
            .args([
                "run",
                "--gen",
                "S=2,A=2x2,H=2,n=2,kind=one_hot",
                "--episodes",
                "10",
                "--c-beta",
                "0.2",
                "--seed",
                "7",
            ])
            .arg("--out")
            .arg(dir.path().join(name))
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for file in ["model.json", "record_seed7.json", "regret_seed7.svg"] {
        assert_eq!(
            read(&dir.path().join("a").join(file)),
            read(&dir.path().join("b").join(file)),
            "{file}"
        );
    }
    assert_eq!(
        strip_wall(&read(&dir.path().join("a/regret_seed7.csv"))),
        strip_wall(&read(&dir.path().join("b/regret_seed7.csv")))
    );
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["run", "--gen", "nonsense", "--out", "/tmp/x"],
        vec!["run", "--out", "/tmp/x"], // no model source
        vec!["sweep", "--gen", "d=4,S=2,A=2,H=2,n=1", "--axis", "gamma", "--values", "1", "--out", "/tmp/x"],
        vec!["frobnicate"],
    ] {
        let out = nqovi().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Model file with a non-stochastic kernel row.
    let model = dir.path().join("bad.json");
    let text = r#"{
        "n": 1, "H": 2, "num_states": 2, "action_dims": [2], "d": 4,
        "feature_kind": "one_hot",
        "mu": [[0.5,0.0, 1.0,0.0, 1.0,0.0, 1.0,0.0], [1.0,0.0, 1.0,0.0, 1.0,0.0, 1.0,0.0]],
        "theta": [[[0.5,0.5,0.5,0.5]], [[0.5,0.5,0.5,0.5]]],
        "s0": 0, "seed": null
    }"#;
    std::fs::write(&model, text).unwrap();
    let out = nqovi()
        .args(["run", "--episodes", "3"])
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Baseline on a multi-agent model is a validation error.
    let out = nqovi()
        .args([
            "baseline",
            "--gen",
            "S=2,A=2x2,H=2,n=2,kind=one_hot",
            "--episodes",
            "3",
        ])
        .arg("--out")
        .arg(dir.path().join("base"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn baseline_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let status = nqovi()
        .args([
            "baseline",
            "--gen",
            "d=4,S=2,A=3,H=2,n=1",
            "--episodes",
            "8",
            "--seed",
            "2",
        ])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.path().join("baseline_traj_seed2.csv"));
    assert_eq!(csv.lines().count(), 1 + 8 * 2);
}

#[test]
fn sweep_writes_aggregate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let status = nqovi()
        .args([
            "sweep",
            "--gen",
            "S=2,A=2x2,H=2,n=2,kind=one_hot",
            "--episodes",
            "5",
            "--c-beta",
            "0.2",
            "--axis",
            "c_beta",
            "--values",
            "0.05,0.2",
        ])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.path().join("sweep.csv"));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("c_beta_0.05").join("regret_seed0.csv").exists());
}

#[test]
fn help_exits_0() {
    let out = nqovi().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
