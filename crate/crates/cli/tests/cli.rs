use std::path::Path;
use std::process::{Command, Output};

fn lse2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lse2d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn small_phase(dir: &Path) -> Vec<String> {
    [
        "phase",
        "--n",
        "5",
        "--r-range",
        "1",
        "--s-range",
        "0:1",
        "--trials",
        "1",
        "--delta-min",
        "0.2",
        "--seed",
        "7",
        "--output",
        dir.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run_owned(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    lse2d(&refs)
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn help_exits_zero_and_bad_flags_exit_one() {
    assert_eq!(code(&lse2d(&["--help"])), 0);
    assert_eq!(code(&lse2d(&["phase", "--no-such-flag"])), 1);
    assert_eq!(code(&lse2d(&["phase", "--r-range", "x:2"])), 1);
}

#[test]
fn invalid_configuration_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = small_phase(tmp.path());
    args.extend(["--n".into(), "6".into()]);
    let out = run_owned(&args);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("manifest.json").exists());

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "no_such_field = 1\n").unwrap();
    let mut args = small_phase(tmp.path());
    args.extend(["--config".into(), cfg.to_str().unwrap().into()]);
    assert_eq!(code(&run_owned(&args)), 1);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = small_phase(tmp.path());
    args.extend(["--config".into(), tmp.path().join("absent.toml").to_str().unwrap().into()]);
    assert_eq!(code(&run_owned(&args)), 2);
}

#[test]
fn phase_writes_artifacts_and_refuses_to_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let args = small_phase(&dir);
    let out = run_owned(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trials.jsonl", "success_rates.csv", "success_rates.pgm", "manifest.json", "timings.json"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("r=1 s=")).count(), 2);
    let csv = std::fs::read_to_string(dir.join("success_rates.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,s,success_rate"));
    let first = std::fs::read(dir.join("trials.jsonl")).unwrap();

    assert_eq!(code(&run_owned(&args)), 2);
    assert_eq!(std::fs::read(dir.join("trials.jsonl")).unwrap(), first);

    let mut forced = args.clone();
    forced.push("--force".into());
    assert_eq!(code(&run_owned(&forced)), 0);
    assert_eq!(std::fs::read(dir.join("trials.jsonl")).unwrap(), first);
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let cfg = tmp.path().join("exp.toml");
    std::fs::write(&cfg, "trials = 2\nseed = 11\n[recovery]\npoints_per_axis = 64\n").unwrap();
    let mut args = small_phase(&dir);
    args.extend(["--config".into(), cfg.to_str().unwrap().into()]);
    let out = run_owned(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir);
    assert_eq!(m["seed"], 11);
    assert_eq!(m["trials_recorded"], 4);
    assert_eq!(m["config"]["n"], 5);
    assert_eq!(m["config"]["recovery"]["points_per_axis"], 64);
    assert_eq!(m["config"]["recovery"]["peak_tol"], 1e-2);
}

#[test]
fn non_convergence_beyond_the_limit_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let mut args = small_phase(&dir);
    args.extend(["--max-iters".into(), "2".into()]);
    let out = run_owned(&args);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("manifest.json").exists());

    let dir = tmp.path().join("tolerant");
    let mut args = small_phase(&dir);
    args.extend(["--max-iters".into(), "2".into(), "--max-nonconverged-fraction".into(), "1".into()]);
    assert_eq!(code(&run_owned(&args)), 0);
}

#[test]
fn single_prints_a_trial_record() {
    let out = lse2d(&["single", "--r", "1", "--s", "1", "--n", "5", "--delta-min", "0.2", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["r"], 1);
    assert_eq!(rec["s"], 1);
    assert_eq!(rec["status"], "solved");
    assert!(rec.get("wall_secs").is_none());
}

#[test]
fn certify_and_verify_bounds_print_reports() {
    let out = lse2d(&["certify", "--m", "30", "--r", "2", "--seed", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["m"], 30);
    assert_eq!(report["trials"].as_array().unwrap().len(), 1);

    let out = lse2d(&["verify-bounds", "--m", "200", "--b-samples", "50", "--e-sets", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["kernel", "b_norm", "ebar", "pass"] {
        assert!(report.get(key).is_some(), "{key} missing");
    }
}
