use std::path::Path;
use std::process::{Command, Output};

use coupled_fv::scenarios::builtin_scenario;

fn cli(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupled-fv"))
        .args(args)
        .env("COUPLED_FV_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_artifacts_to_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["run", "--scenario", "test12", "--flux", "force"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for suffix in ["profile.csv", "traces.json", "ledger.json", "errors.json"] {
        assert!(
            dir.path().join(format!("test12_force_100_{suffix}")).exists(),
            "{suffix}"
        );
    }
    let csv = std::fs::read_to_string(dir.path().join("test12_force_100_profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn out_flag_overrides_the_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let flag = flag_dir.path().to_str().unwrap();
    let o = cli(
        &["run", "--scenario", "test1", "--cells", "40", "--out", flag],
        env_dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.path().join("test1_rusanov_40_ledger.json").exists());
    assert_eq!(std::fs::read_dir(env_dir.path()).unwrap().count(), 0);
}

#[test]
fn json_config_path_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = builtin_scenario("test3").unwrap().with_cells(50);
    cfg.name = "custom".to_string();
    let path = dir.path().join("custom.json");
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    let o = cli(&["run", "--scenario", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("custom_rusanov_50_profile.csv").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["run"],
        vec!["run", "--scenario", "test99"],
        vec!["run", "--scenario", "test1", "--courant", "1.5"],
        vec!["sweep", "--scenario", "test1"],
    ] {
        let o = cli(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = cli(&["run", "--scenario", "test99"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("test12"));
}

#[test]
fn solver_failure_exits_with_one_and_writes_diagnostics() {
    // supersonic heat-exchange startup has no admissible traces without the sonic fix
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = builtin_scenario("test6").unwrap();
    cfg.solver.sonic_fix = false;
    let path = dir.path().join("nofix.json");
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    let o = cli(&["run", "--scenario", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let diag = dir.path().join("test6_rusanov_500_diagnostics.json");
    let text = std::fs::read_to_string(diag).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["error"].as_str().unwrap().contains("least squares"));
}

#[test]
fn verify_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["verify", "--scenario", "test1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
    assert!(text.contains("cell entropy inequality"));
}

#[test]
fn sweep_prints_a_table_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(
        &["sweep", "--scenario", "test11", "--cells", "50,100"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("err rho-"));
    assert_eq!(text.lines().count(), 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("test11_rusanov_sweep.json")).unwrap())
            .unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    assert!(json["rows"][0]["l1_to_finest"].as_f64().unwrap() > 0.0);
}
