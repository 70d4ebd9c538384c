use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const REFERENCE: &str = r#"
version = 1
degree = 2
scale = 1.0
flow_steps = 64

[[terms]]
powers = [1, 1, 0]
coeff = [0.1, 0.0, -0.05]

[[terms]]
powers = [0, 0, 2]
coeff = [0.0, 0.08, 0.0]

[[terms]]
powers = [1, 0, 0]
coeff = [0.0, 0.0, 0.1]
"#;

const ZERO: &str = "version = 1\ndegree = 0\nscale = 0.0\n";

const DEGENERATE: &str = r#"
version = 1
degree = 0
scale = 1.0
flow_steps = 64

[[terms]]
powers = [0, 0, 0]
coeff = [0.0, 0.0, 5.0]
"#;

fn zoll(dir: &Path, spec: &str, args: &[&str]) -> Output {
    let spec_path = dir.join("spec.toml");
    fs::write(&spec_path, spec).unwrap();
    Command::new(env!("CARGO_BIN_EXE_zoll"))
        .args(args)
        .arg("--spec")
        .arg(&spec_path)
        .arg("--output-dir")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_docility_on_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoll(dir.path(), ZERO, &["check-docility"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("docility passed"));
    let report = fs::read_to_string(dir.path().join("out/docility.toml")).unwrap();
    assert!(report.contains("passed = true"));
}

#[test]
fn check_docility_on_degenerate_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoll(dir.path(), DEGENERATE, &["check-docility"]);
    assert_eq!(o.status.code(), Some(2));
    let record = fs::read_to_string(dir.path().join("out/error.toml")).unwrap();
    assert!(record.contains("exit_code = 2"));
    assert!(record.contains("FixedPointGap"));
}

#[test]
fn solve_disk_writes_disk_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoll(dir.path(), REFERENCE, &["solve-disk", "--u0", "1,0;0,0", "-K", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1);
    let rec = zoll_core::io::load_disk(&dir.path().join("out/disk.toml")).unwrap();
    assert!(rec.disk.residual < 1e-9);
    let spec = zoll_core::io::parse_spec(REFERENCE).unwrap();
    assert_eq!(rec.spec_hash, spec.hash());
    let r = zoll_core::rhsolver::boundary_residual(&rec.disk, &spec).unwrap();
    assert!((r - rec.disk.residual).abs() < 1e-12);
    assert!(dir.path().join("out/boundary.csv").exists());
}

#[test]
fn diagnostics_of_stored_disk() {
    let dir = tempfile::tempdir().unwrap();
    let d = zoll_core::rhsolver::round_disk(&zoll_core::P1Point::real(0.6, 0.8), 16);
    let spec = zoll_core::io::parse_spec(ZERO).unwrap();
    let path = dir.path().join("round.toml");
    zoll_core::io::save_disk(&path, &spec.hash(), &d, None).unwrap();
    let o = zoll(dir.path(), ZERO, &["diagnostics", "--disk", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Maslov 2+1=3"));
    let rec = zoll_core::io::load_disk(&dir.path().join("out/disk.toml")).unwrap();
    assert_eq!(rec.diagnostics.unwrap().total_maslov, 3);
    // a disk solved for another surface is rejected
    let o = zoll(dir.path(), REFERENCE, &["diagnostics", "--disk", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_rejects_degenerate_spec_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoll(dir.path(), DEGENERATE, &["sweep", "-n", "16", "-K", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out/grid").exists());
}

#[test]
fn sweep_then_geodesic_from_saved_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoll(dir.path(), ZERO, &["sweep", "-n", "16", "-K", "16", "--workers", "1", "--diagnostics"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("16 disks"));
    let grid = dir.path().join("out/grid");
    assert!(grid.join("index.toml").exists());
    let o = zoll(
        dir.path(),
        ZERO,
        &["geodesic", "--grid", grid.to_str().unwrap(), "-K", "16", "--z", "0.6,0;0.8,0", "--z", "0,1;1,0"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("2/2 closed"));
    let csv = fs::read_to_string(dir.path().join("out/geodesic_001.csv")).unwrap();
    let g = zoll_core::io::parse_geodesic_csv(&csv).unwrap();
    assert!(g.closed && g.nodes.len() > 10);
}

#[test]
fn lagrangian_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = zoll(dir.path(), ZERO, &["lagrangian", "-m", "64"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict lagrangian"));
    let o = zoll(dir.path(), REFERENCE, &["lagrangian", "-m", "64"]);
    assert!(stdout(&o).contains("verdict not_lagrangian"));
}

#[test]
fn invalid_inputs_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve-disk", "--u0", "1,0;0,0", "-K", "8"][..],
        &["solve-disk", "--u0", "0,0;0,0"],
        &["solve-disk", "--u0", "garbage"],
        &["sweep", "-n", "8"],
        &["lagrangian", "-m", "4"],
        &["lagrangian", "--workers", "0"],
        &["no-such-command"],
    ] {
        let o = zoll(dir.path(), REFERENCE, args);
        assert_eq!(o.status.code(), Some(4), "{args:?}");
    }
    let o = zoll(dir.path(), "version = 1\ndegree = 2\n", &["lagrangian"]);
    assert_eq!(o.status.code(), Some(4));
    let record = fs::read_to_string(dir.path().join("out/error.toml")).unwrap();
    assert!(record.contains("exit_code = 4"));
}

#[test]
fn workers_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, ZERO).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_zoll"))
        .args(["lagrangian", "-m", "32", "--spec"])
        .arg(&spec)
        .arg("--output-dir")
        .arg(dir.path())
        .env("ZOLL_WORKERS", "nope")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // a strong field with continuation forbidden from taking small steps
    let strong = REFERENCE.replace("0.1, 0.0, -0.05", "0.8, 0.0, -0.5");
    let o = zoll(
        dir.path(),
        &strong,
        &["solve-disk", "--u0", "1,0;0,0", "-K", "16", "--initial-step", "1", "--min-step", "0.9"],
    );
    assert_eq!(o.status.code(), Some(3));
    let record = fs::read_to_string(dir.path().join("out/error.toml")).unwrap();
    assert!(record.contains("kind = \"continuation_stuck\""));
}
