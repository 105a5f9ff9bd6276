use std::path::Path;
use std::process::{Command, Output};

fn qklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qklab"))
        .args(args)
        .env_remove("QKLAB_OUT")
        .output()
        .expect("binary runs")
}

fn write_toy_config(dir: &Path) -> String {
    let path = dir.join("toy.cfg");
    std::fs::write(&path, qklab_core::experiments::preset_text("toy_bounds").unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_2() {
    let o = qklab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn help_exits_0() {
    assert_eq!(qklab(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_writes_the_sweep_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_toy_config(dir.path());
    let out = dir.path().join("out");
    let o = qklab(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,decay_factor,gamma_sq_clean,gamma_sq_noisy,upper,lower,lower_case,feasible,\
         gamma_sq_noisy_est,c_prime,c_prime_min,c_prime_max,upper_violated,lower_violated,\
         config_hash,seed"
    );
    assert_eq!(lines.count(), 16);
    assert!(out.join("feasibility.csv").exists());
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("bounds_record.json")).unwrap()).unwrap();
    assert_eq!(record["command"], "bounds");
    assert_eq!(record["summary"]["upper_violations"], 0);
}

#[test]
fn rejected_dataset_exits_2_with_the_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = qklab(&["bounds", "--preset", "gaussian_bounds", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("need C' >="), "{}", stderr(&o));
}

#[test]
fn c_prime_outside_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = qklab(&[
        "bounds",
        "--preset",
        "toy_bounds",
        "--set",
        "bounds.c_prime=1e6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside the feasible range"), "{}", stderr(&o));
}

#[test]
fn rerun_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = qklab(&["corruption", "--preset", "toy_bounds", "--set", "dataset.samples=40", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["corruption_margins.csv", "corruption_accuracy.csv", "corruption_regression.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn out_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (dir.path().join("env"), dir.path().join("flag"));
    let run = |extra: &[&str]| {
        let mut args = vec!["kernel-export", "--preset", "toy_bounds"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_qklab"))
            .args(&args)
            .env("QKLAB_OUT", &env_dir)
            .output()
            .unwrap()
    };
    assert!(run(&[]).status.success());
    assert!(env_dir.join("kernel.csv").exists());
    assert!(run(&["--out", flag_dir.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(flag_dir.join("kernel.csv")).unwrap();
    // header plus one row per sample
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(qklab(&["select", "--preset", "no_such_preset"]).status.code(), Some(2));
    assert_eq!(qklab(&["select", "--preset", "toy_bounds", "--set", "svm.nope=1"]).status.code(), Some(2));
    assert_eq!(qklab(&["select"]).status.code(), Some(2));
    assert_eq!(qklab(&["select", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));
}

#[test]
fn iteration_budget_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = qklab(&[
        "select",
        "--preset",
        "toy_bounds",
        "--set",
        "svm.max_iter=1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn presets_are_listed() {
    let o = qklab(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "gaussian_bounds"));
}
