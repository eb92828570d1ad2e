use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qbeat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbeat"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const BEAT_CONFIG: &str = "\
name = beat_phi
state = phi
reservoir_a.lambda = 0.2
reservoir_a.delta = 10
reservoir_b.lambda = 0.2
reservoir_b.delta = 9
t_max = 25
n_steps = 2501
measures = concurrence
";

#[test]
fn evolve_writes_csv_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.conf", BEAT_CONFIG);
    let out = dir.path().join("out");
    let res = qbeat(&["evolve", &cfg, "--out", out.to_str().unwrap(), "--steps", "3", "--tmax", "1"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("beat_phi.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,C,gA2,gB2");
    assert_eq!(rows.len(), 4);
    assert!(text.contains("# n_steps = 3"));
    assert!(text.contains("# t_max = 1"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.conf", BEAT_CONFIG);
    let mut outputs = Vec::new();
    for sub in ["x", "y"] {
        let out = dir.path().join(sub);
        let res = qbeat(&["evolve", &cfg, "--out", out.to_str().unwrap(), "--steps", "200"]);
        assert!(res.status.success());
        outputs.push(fs::read(out.join("beat_phi.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn beat_reports_key_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.conf", BEAT_CONFIG);
    let res = qbeat(&["beat", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("# beat.classification = beat"), "{stdout}");
    assert!(stdout.contains("# beat.modulation_depth = "));
}

#[test]
fn beat_on_flat_trace_is_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = BEAT_CONFIG.replace("t_max = 25", "t_max = 0.5");
    let cfg = write_config(dir.path(), "a.conf", &body);
    let res = qbeat(&["beat", &cfg]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("beat_phi"));
}

#[test]
fn figure_writes_one_csv_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    let res = qbeat(&["figure", "2", "--out", out.to_str().unwrap(), "--steps", "50"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4, "{names:?}");
    assert!(names.iter().all(|n| n.ends_with(".csv")));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "e.conf", &BEAT_CONFIG.replace("measures = concurrence", "measures ="));
    assert_eq!(qbeat(&["evolve", &empty]).status.code(), Some(1));
    assert_eq!(qbeat(&["figure", "9"]).status.code(), Some(1));
    assert_eq!(qbeat(&["evolve", "/nonexistent/config"]).status.code(), Some(1));
    assert_eq!(qbeat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qbeat(&["--help"]).status.code(), Some(0));
}

#[test]
fn validate_passes() {
    let res = qbeat(&["validate"]);
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert_eq!(res.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().count() >= 5);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
}
