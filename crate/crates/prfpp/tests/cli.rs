//! End-to-end checks of the `prfpp` binary: subcommands, exit codes, and
//! file outputs.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prfpp"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("prfpp-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn solve_bundled_scenario_succeeds() {
    let out = bin()
        .args(["solve", "--scenario", "shorting_2agent"])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("-0.0097"), "{stdout}");
}

#[test]
fn solve_writes_json_record() {
    let path = temp_path("record.json");
    let out = bin()
        .args([
            "solve",
            "--scenario",
            "benchmark_mfg",
            "--samples",
            "200",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&path)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let record: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(record["seed"], 5);
    assert_eq!(record["strategies"].as_array().unwrap().len(), 200);
    assert!(record["y_star"].as_f64().unwrap() > 0.0);
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_writes_csv_in_grid_order() {
    let path = temp_path("sweep.csv");
    let out = bin()
        .args(["sweep", "--scenario", "figure1", "--samples", "300", "--out"])
        .arg(&path)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "panel,parameter,value,fixed_agent_strategy,y_star,pop_mean_strategy,pop_std_strategy,\
         iterations,residual,error,scenario_hash,seed"
    );
    assert_eq!(text.lines().count(), 1 + 9 + 7);
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_subcommand_reports_pass() {
    let out = bin()
        .args(["verify", "--scenario", "shorting_2agent", "--check", "martingale"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn invalid_scenario_exits_2() {
    let path = temp_path("broken.toml");
    std::fs::write(&path, "mode = \"mfg\"\n[market]\nu = 1.2\nd = 1.3\n").unwrap();
    let out = bin()
        .args(["solve", "--scenario"])
        .arg(&path)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_file(&path).ok();
}

#[test]
fn invariant_violation_exits_2_with_field_name() {
    let path = temp_path("bad-market.toml");
    std::fs::write(
        &path,
        r#"
mode = "nash-homogeneous"
n-agents = 3

[common-noise]
p-cn = 0.6

[agent]
gamma = 3.0
theta = 0.4

[market]
u = 1.2
d = 1.1
p-bull = 0.6
p-bear = 0.4
"#,
    )
    .unwrap();
    let out = bin()
        .args(["solve", "--scenario"])
        .arg(&path)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d must be < 1"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn unknown_check_exits_3() {
    let out = bin()
        .args(["verify", "--scenario", "shorting_2agent", "--check", "nope"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_scenario_names_bundled_options() {
    let out = bin()
        .args(["solve", "--scenario", "does-not-exist"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("benchmark_mfg"));
}

#[test]
fn report_runs_all_applicable_checks() {
    let out = bin()
        .args(["report", "--scenario", "independent"])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("martingale: PASS"), "{stdout}");
}
