use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const QUADRATIC: &str = r#"{
  "objective": {"name": "quadratic"},
  "noise": {"kind": "additive-gaussian", "sigma": 1.0},
  "schedule": {"family": "scalar-power", "c": 0.5, "beta": 0.75, "p": 1},
  "run": {"theta0": [5.0], "K": 2000, "n_trajectories": 16, "master_seed": 11},
  "diagnostics": {"capture": {"R": 1.0}},
  "checks": {"n_pairs": 2000, "n_points": 50, "n_draws": 200, "K_max": 100000}
}"#;

const LOGLOG: &str = r#"{
  "objective": {"name": "loglog1p-abs"},
  "noise": {"kind": "rademacher-radial"},
  "schedule": {"family": "scalar-power", "c": 0.5, "beta": 0.75, "p": 1},
  "run": {"theta0": [5.0], "K": 500, "n_trajectories": 4, "master_seed": 1}
}"#;

fn sgdlab() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sgdlab"));
    cmd.env_remove("SGDLAB_SEED");
    cmd
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn exit_code(cmd: &mut Command) -> i32 {
    let out = cmd.output().unwrap();
    out.status.code().expect("process terminated by signal")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_report_and_checkpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", QUADRATIC);
    let out = tmp.path().join("out");
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&out)), 0);
    assert!(out.join("ensemble_report.json").is_file());
    assert!(out.join("checkpoints.csv").is_file());
    let report = read_json(&out.join("ensemble_report.json"));
    assert_eq!(report["n_trajectories"], 16);
    let csv = std::fs::read_to_string(out.join("checkpoints.csv")).unwrap();
    assert!(csv.starts_with("k,statistic,value,stderr"));
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\"objective\": ");
    let out = tmp.path().join("out");
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&out)), 2);
    assert!(!out.exists());
}

#[test]
fn unknown_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let body = QUADRATIC.replace("\"master_seed\": 11", "\"master_seed\": 11, \"sead\": 3");
    let cfg = write_config(tmp.path(), "q.json", &body);
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(tmp.path().join("o"))), 2);
}

#[test]
fn start_inside_excluded_ball_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ll.json", &LOGLOG.replace("[5.0]", "[0.5]"));
    let out = tmp.path().join("out");
    let output = sgdlab().arg("run").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("domain"));
    assert!(!out.exists());
}

#[test]
fn existing_output_requires_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", QUADRATIC);
    let out = tmp.path().join("out");
    std::fs::create_dir(&out).unwrap();
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&out)), 2);
    assert!(!out.join("ensemble_report.json").exists());
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&out).arg("--force")), 0);
    assert!(out.join("ensemble_report.json").is_file());
}

#[test]
fn all_checks_pass_on_quadratic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", QUADRATIC);
    let out = tmp.path().join("out");
    assert_eq!(exit_code(sgdlab().arg("check").arg(&cfg).arg("--out").arg(&out)), 0);
    for name in ["p1p2p3p4", "descent", "variance", "gradbound", "smoothness", "radial", "lemma4"] {
        assert!(out.join(format!("check_{name}.json")).is_file(), "missing report for {name}");
    }
}

#[test]
fn schedule_violating_p3_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", &QUADRATIC.replace("\"beta\": 0.75", "\"beta\": 1.2"));
    let out = tmp.path().join("out");
    assert_eq!(exit_code(sgdlab().args(["check", "--which", "p1p2p3p4"]).arg(&cfg).arg("--out").arg(&out)), 1);
    let doc = read_json(&out.join("check_p1p2p3p4.json"));
    assert_eq!(doc["report"]["report"]["p3_verdict"], "fail");
    assert_eq!(doc["report"]["report"]["p2_verdict"], "pass");
}

#[test]
fn radial_check_fails_for_loglog_with_rademacher_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ll.json", LOGLOG);
    let out = tmp.path().join("out");
    assert_eq!(exit_code(sgdlab().args(["check", "--which", "radial"]).arg(&cfg).arg("--out").arg(&out)), 1);
    let doc = read_json(&out.join("check_radial.json"));
    assert_eq!(doc["report"]["a6_verdict"], "violated-at-horizon");
}

#[test]
fn unknown_check_name_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", QUADRATIC);
    let code = exit_code(sgdlab().args(["check", "--which", "descent,bogus"]).arg(&cfg).arg("--out").arg(tmp.path().join("o")));
    assert_eq!(code, 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", QUADRATIC);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&a).args(["--jobs", "1"])), 0);
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&b).args(["--jobs", "4"])), 0);
    for file in ["ensemble_report.json", "checkpoints.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn seed_flag_beats_environment_beats_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.json", QUADRATIC);
    let seed_of = |dir: &Path| read_json(&dir.join("ensemble_report.json"))["master_seed"].as_u64().unwrap();

    let file = tmp.path().join("file");
    assert_eq!(exit_code(sgdlab().arg("run").arg(&cfg).arg("--out").arg(&file)), 0);
    assert_eq!(seed_of(&file), 11);

    let env = tmp.path().join("env");
    assert_eq!(exit_code(sgdlab().env("SGDLAB_SEED", "23").arg("run").arg(&cfg).arg("--out").arg(&env)), 0);
    assert_eq!(seed_of(&env), 23);

    let flag = tmp.path().join("flag");
    let code = exit_code(sgdlab().env("SGDLAB_SEED", "23").arg("run").arg(&cfg).arg("--out").arg(&flag).args(["--seed", "5"]));
    assert_eq!(code, 0);
    assert_eq!(seed_of(&flag), 5);
}

#[test]
fn stopping_times_and_probe_write_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ll.json", LOGLOG);
    let st = tmp.path().join("st");
    assert_eq!(exit_code(sgdlab().arg("stopping-times").arg(&cfg).arg("--out").arg(&st)), 0);
    let doc = read_json(&st.join("stopping_times.json"));
    let rows = doc["trajectories"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let taus = row["stopping_times"]["taus"].as_array().unwrap();
        assert_eq!(taus[0], 0);
        assert!(taus.windows(2).all(|w| w[0].as_u64() < w[1].as_u64()));
    }

    let probe = tmp.path().join("probe");
    assert_eq!(exit_code(sgdlab().arg("probe-radial").arg(&cfg).arg("--out").arg(&probe)), 0);
    assert!(probe.join("radial_probe.json").is_file());

    let sched = tmp.path().join("sched");
    assert_eq!(exit_code(sgdlab().arg("validate-schedule").arg(&cfg).arg("--out").arg(&sched)), 0);
    assert!(sched.join("schedule_report.json").is_file());
}
