use std::path::Path;
use std::process::{Command, Output};

use aerosurvey_cli::output::{read_grid_csv, AGGREGATE_HEADER, METRICS_HEADER};

fn aerosurvey(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aerosurvey"))
        .args(&args[..1])
        .arg("--config")
        .arg(config)
        .arg("--out-dir")
        .arg(out)
        .args(&args[1..])
        .output()
        .unwrap()
}

fn scenario(dir: &Path, json: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, json).unwrap();
    path
}

const SMALL: &str = r#"{"rows": 8, "cols": 6, "r_min": -60, "max_measurements": 30}"#;

#[test]
fn survey_writes_metrics_trajectory_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let res = aerosurvey(&["survey", "--snapshots", "0,10,500"], &cfg, &out);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert!(String::from_utf8_lossy(&res.stderr).contains("snapshot 500 skipped"));

    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert_eq!(lines.next(), Some(METRICS_HEADER));
    assert_eq!(lines.count(), 31);

    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,x,y\n0,0,0\n"));

    // The prior snapshot holds the ring-shaped service uncertainty.
    let prior =
        read_grid_csv(&std::fs::read_to_string(out.join("snapshot_0000_unc_service.csv")).unwrap())
            .unwrap();
    assert_eq!(prior.len(), 8);
    assert!(prior.iter().all(|row| row.len() == 6));
    let unc_power =
        read_grid_csv(&std::fs::read_to_string(out.join("snapshot_0000_unc_power.csv")).unwrap())
            .unwrap();
    assert!(unc_power.iter().flatten().all(|&v| v == 1.0));
    for name in [
        "snapshot_0000_unc_service.pgm",
        "snapshot_0010_mean_tx0.csv",
        "snapshot_0010_mean_tx1.csv",
        "snapshot_0010_service_prob.csv",
        "true_power_tx0.csv",
        "true_power_tx1.pgm",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    let pgm = std::fs::read_to_string(out.join("true_power_tx0.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n6 8\n255\n"));
}

#[test]
fn survey_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        assert!(aerosurvey(&["survey", "--seed", seed], &cfg, &out)
            .status
            .success());
        std::fs::read(out.join("metrics.csv")).unwrap()
    };
    assert_eq!(run("a", "3"), run("b", "3"));
    assert_ne!(run("a", "3"), run("c", "4"));
}

#[test]
fn planner_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert!(aerosurvey(&["survey", "--planner", "spiral"], &cfg, &out)
        .status
        .success());
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    // The spiral starts along row 0.
    assert!(traj.lines().nth(3).unwrap().ends_with(",10,0"), "{traj}");
    let res = aerosurvey(&["survey", "--planner", "zigzag"], &cfg, &out);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("missing.json");
    assert_eq!(
        aerosurvey(&["survey"], &missing, &out).status.code(),
        Some(1)
    );

    let bad = scenario(dir.path(), r#"{"speeed": 3}"#);
    let res = aerosurvey(&["survey"], &bad, &out);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("speeed"));

    let bad = scenario(dir.path(), r#"{"spacing": -1}"#);
    let res = aerosurvey(&["montecarlo"], &bad, &out);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`spacing`"));
    assert!(!out.exists());
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let res = aerosurvey(&["survey"], &cfg, &blocker.join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn montecarlo_writes_one_csv_per_planner() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let out = dir.path().join("mc");
    let res = aerosurvey(
        &[
            "montecarlo",
            "--runs",
            "3",
            "--planners",
            "min_cost,grid,spiral,random",
        ],
        &cfg,
        &out,
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "montecarlo_grid.csv",
            "montecarlo_min_cost.csv",
            "montecarlo_random.csv",
            "montecarlo_spiral.csv"
        ]
    );
    let text = std::fs::read_to_string(out.join("montecarlo_grid.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(AGGREGATE_HEADER));
    assert_eq!(text.lines().count(), 32);
}

#[test]
fn single_run_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let out = dir.path().join("mc");
    assert!(aerosurvey(
        &["montecarlo", "--runs", "1", "--planners", "random"],
        &cfg,
        &out
    )
    .status
    .success());
    let text = std::fs::read_to_string(out.join("montecarlo_random.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for line in text.lines().skip(1) {
        for (col, v) in header.iter().zip(line.split(',')) {
            if col.starts_with("std_") {
                assert_eq!(v.parse::<f64>().unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), SMALL);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_aerosurvey"))
            .env("AEROSURVEY_THREADS", threads)
            .args([
                "montecarlo",
                "--runs",
                "5",
                "--planners",
                "min_cost",
                "--config",
            ])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("montecarlo_min_cost.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("auto", "0"));
    assert_eq!(run("one", "1"), run("three", "3"));
}
