use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_axiswirl");

fn axiswirl(root: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("AXISWIRL_OUTPUT_ROOT", root)
        .output()
        .expect("spawn axiswirl")
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(format!("{name}.json"));
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SWIRL: &str = r#"{
  "schema_version": 1,
  "simulation": {
    "grid": {"n_rho": 12, "n_z": 12, "rho_max": 1.0},
    "nu": 1.0, "t_end": 0.004, "dt": {"mode": "cfl", "fraction": 0.5},
    "initial": {"kind": "taylor_vortex_swirl", "amplitude": 0.05, "swirl": 0.5, "mode": 1},
    "forcing": {"kind": "table", "terms": [
      {"component": "phi", "amplitude": 2.0, "rho_power": 1, "wall_power": 1, "z_mode": 1}]}
  },
  "exponents": {"a": 6, "b": 4, "gamma": 0},
  "output": {"checkpoint_file_stride": 5}
}"#;

#[test]
fn zero_scenario_writes_zero_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(
        tmp.path(),
        "zero",
        r#"{"schema_version": 1,
            "simulation": {"grid": {"n_rho": 6, "n_z": 6}, "nu": 1.0, "t_end": 0.004,
                           "dt": {"mode": "fixed", "value": 0.001}},
            "exponents": {"a": 6, "b": "inf", "gamma": 0}}"#,
    );
    let out = axiswirl(&tmp.path().join("out"), &["run", &s]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/zero/diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for name in ["kinetic_energy", "swirl_lq_power", "blowup_functional", "vorticity_l2", "serrin_running"] {
        let i = header.iter().position(|h| *h == name).unwrap();
        assert!(rows.iter().all(|r| r[i].parse::<f64>().unwrap() == 0.0), "{name}");
    }
    for f in ["manifest.json", "summary.txt", "summary.json"] {
        assert!(tmp.path().join("out/zero").join(f).exists(), "{f}");
    }
}

#[test]
fn inadmissible_scenario_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SWIRL.replace(r#""a": 6, "b": 4"#, r#""a": 3, "b": 2"#);
    let s = scenario(tmp.path(), "bad", &body);
    let out = axiswirl(tmp.path(), &["run", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3/a+2/b must be < 2"));
}

#[test]
fn schema_errors_exit_2_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SWIRL.replace(r#""nu": 1.0"#, r#""nu": "one""#);
    let s = scenario(tmp.path(), "bad", &body);
    let out = axiswirl(tmp.path(), &["run", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulation.nu"));
}

#[test]
fn missing_and_unwritable_paths_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = axiswirl(tmp.path(), &["run", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(3));
    let s = scenario(tmp.path(), "swirl", SWIRL);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = axiswirl(&blocker, &["run", &s]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario(tmp.path(), "swirl", SWIRL);
    for root in ["a", "b"] {
        let out = axiswirl(&tmp.path().join(root), &["run", &s]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    for f in ["diagnostics.csv", "summary.json", "manifest.json", "checkpoints/step_00000005.ckpt"] {
        let a = fs::read(tmp.path().join("a/swirl").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b/swirl").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn check_exponents_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = axiswirl(tmp.path(), &["check-exponents", "6", "4", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for line in ["verdict: admissible", "p     = 2\n", "s     = 6\n", "alpha = 6\n", "theta = 0.666"] {
        assert!(text.contains(line), "{line}\n{text}");
    }
    let out = axiswirl(tmp.path(), &["check-exponents", "6", "inf", "0"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("delta = 0.5") && text.contains("s     = 6\n") && text.contains("p     = 2\n"));
    let out = axiswirl(tmp.path(), &["check-exponents", "1", "4", "0"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: inadmissible"));
    let out = axiswirl(tmp.path(), &["check-exponents", "6", "four", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mms_level_and_control_handling() {
    let tmp = tempfile::tempdir().unwrap();
    let out = axiswirl(tmp.path(), &["mms", "decaying_swirl", "16", "32"]);
    assert_eq!(out.status.code(), Some(2));
    let out = axiswirl(tmp.path(), &["mms", "lopsided_control", "16", "32", "64"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let csv = fs::read_to_string(tmp.path().join("mms_lopsided_control/convergence.csv")).unwrap();
    assert!(csv.starts_with("level,field,error,order\n"));
    let out = axiswirl(tmp.path(), &["mms", "rigid_rotation", "8", "16", "32"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn sweep_runs_each_scenario_into_its_own_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("batch");
    fs::create_dir(&dir).unwrap();
    scenario(&dir, "one", SWIRL);
    scenario(&dir, "two", &SWIRL.replace(r#""b": 4"#, r#""b": "inf""#));
    let out = axiswirl(&tmp.path().join("out"), &["sweep", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(tmp.path().join("out/one/diagnostics.csv").exists());
    assert!(tmp.path().join("out/two/diagnostics.csv").exists());
}
