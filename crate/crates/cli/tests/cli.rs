use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uav-relay")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, "[scenario]\nnum_slots = 6\nmax_step = 0.7\n").unwrap();
    path.display().to_string()
}

#[test]
fn sweep_writes_tables_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "--config",
        &config,
        "--protocol",
        "df",
        "--strategy",
        "greedy,static",
        "--init",
        "straight",
        "--sweep",
        "altitude",
        "--values",
        "0.2,0.4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("strategy"));
    assert_eq!(table.lines().count(), 1 + 4);
    for name in ["throughput.csv", "power_profile.csv", "ratio_profile.csv", "trajectory.csv", "iterations.csv", "throughput.svg"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let csv = fs::read_to_string(out.join("throughput.csv")).unwrap();
    assert!(csv.starts_with("strategy,protocol,init,altitude,"));
    assert!(csv.contains("greedy,df,straight,0.4,"));
}

#[test]
fn no_plots_skips_charts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let o = run(&["--config", &config, "--strategy", "static", "--no-plots", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("throughput.csv").exists());
    assert!(!out.join("throughput.svg").exists());
}

#[test]
fn bad_input_exits_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[scenario]\nnum_slot = 6\n").unwrap();
    let o = run(&["--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("num_slot"));

    let o = run(&["--protocol", "xf", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["--sweep", "gamma"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_the_flags() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for flag in ["--config", "--protocol", "--strategy", "--init", "--sweep", "--values", "--out", "--seed", "--tol", "--max-outer", "--no-plots"] {
        assert!(text.contains(flag), "{flag}");
    }
}
