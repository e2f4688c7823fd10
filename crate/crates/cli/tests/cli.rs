use std::path::Path;
use std::process::{Command, Output};

use dfock::table::{read_curves, read_matrix_elements};

fn dfock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfock")).args(args).env_remove("DFOCK_DEFAULT_CUTOFF").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = dfock(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn matrix_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.csv");
    ok(&[
        "matrix-elements",
        "--alpha",
        "0.2",
        "--alpha-im",
        "0.05",
        "--lmax",
        "4",
        "--nmax",
        "6",
        "--out",
        path_str(&file),
    ]);
    let rows = read_matrix_elements(std::fs::File::open(&file).unwrap()).unwrap();
    assert_eq!(rows.len(), 35);
    let alpha = dfock_core::C64::new(0.2, 0.05);
    for r in &rows {
        let c = dfock_core::displaced::matrix_element(r.l, r.n, alpha);
        assert_eq!((r.re.to_bits(), r.im.to_bits()), (c.re.to_bits(), c.im.to_bits()));
    }
    let bytes = std::fs::read(&file).unwrap();
    assert!(!bytes.contains(&b'\r'));
}

#[test]
fn identity_at_zero_alpha() {
    let text = ok(&["matrix-elements", "--alpha", "0", "--lmax", "2", "--nmax", "2"]);
    let rows = read_matrix_elements(text.as_bytes()).unwrap();
    for r in rows {
        assert_eq!(r.re, if r.l == r.n { 1.0 } else { 0.0 });
    }
}

#[test]
fn figure_output_is_deterministic_and_bounded() {
    let a = ok(&["figure", "2a"]);
    let b = ok(&["figure", "2a"]);
    assert_eq!(a, b);
    let pts = read_curves(a.as_bytes()).unwrap();
    assert_eq!(pts.len(), 4 * 101);
    let at = |curve: u32, a1: f64| pts.iter().find(|p| p.curve == curve && p.a1 == a1).unwrap().value;
    assert!((at(4, 0.0) - 0.9992).abs() < 1e-4);
    assert!((at(1, 1.0) - 0.03843).abs() < 1e-5);
    assert!(pts.iter().filter(|p| p.curve == 4).all(|p| p.value >= 0.92));
}

#[test]
fn every_figure_stays_in_range() {
    for id in ["2a", "2b", "2c", "2d", "3a", "3b", "3c", "3d", "4a", "4b", "5a", "5b"] {
        let pts = read_curves(ok(&["figure", id, "--points", "21"]).as_bytes()).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| (0.0..=1.0 + 1e-9).contains(&p.value)), "figure {id}");
    }
    let family = read_curves(ok(&["figure", "4a", "--points", "3"]).as_bytes()).unwrap();
    assert_eq!(family.iter().map(|p| p.curve).max(), Some(8));
}

#[test]
fn demod_rows_and_higher_order() {
    let text =
        ok(&["demod", "--strategy", "swap", "--branch", "k", "--alpha", "0.2", "--points", "11", "--higher-order"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,a1,value,formula_id"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 22);
    let first: f64 = rows[0][2].parse().unwrap();
    assert!((first - 0.99913).abs() < 1e-4);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][3], "P_t1^s");
        assert_eq!(pair[1][3], "P_t1^s_m2");
        assert!(pair[1][2].parse::<f64>().unwrap() >= pair[0][2].parse::<f64>().unwrap());
    }
}

#[test]
fn teleport_report() {
    let text = ok(&["teleport", "--a0", "0.7071067811865476", "--a1", "0.7071067811865476", "--alpha", "0.2"]);
    let sum_line = text.lines().find(|l| l.starts_with("sum of probabilities")).unwrap();
    let sum: f64 = sum_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((sum - 1.0).abs() < 1e-9);
    assert!(!text.contains("finite_fidelity"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.csv");
    let finite =
        ok(&["teleport", "--a0", "0.6", "--a1", "0.8", "--alpha", "0.2", "--t", "0.995", "--out", path_str(&file)]);
    assert!(finite.contains("finite_fidelity"));
    let csv = std::fs::read_to_string(&file).unwrap();
    assert!(csv.starts_with("j,m,probability,fidelity,finite_fidelity\n"));
}

#[test]
fn unnormalized_qubit_warns() {
    let out = dfock(&["teleport", "--a0", "1", "--a1", "1", "--alpha", "0.2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalized"));
}

#[test]
fn channel_entropy_grows() {
    let text = ok(&["channel-entropy", "--beta", "0.2,2.0"]);
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(values[0] < values[1] && (values[1] - 1.0).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    assert_eq!(dfock(&["figure", "9z"]).status.code(), Some(2));
    assert_eq!(dfock(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        dfock(&["teleport", "--k", "2", "--n", "1", "--a0", "1", "--a1", "0", "--alpha", "0.2"]).status.code(),
        Some(2)
    );
    assert_eq!(dfock(&["figure", "2a", "--alpha", "-1"]).status.code(), Some(2));
    let domain = dfock(&["demod", "--strategy", "coherent", "--branch", "k", "--alpha", "1.2"]);
    assert_eq!(domain.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("alpha"));
    assert_eq!(dfock(&["--help"]).status.code(), Some(0));
    let unwritable = dfock(&["figure", "2a", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(unwritable.status.code(), Some(1));
}

#[test]
fn cutoff_environment_variable() {
    let out = Command::new(env!("CARGO_BIN_EXE_dfock"))
        .args(["channel-entropy", "--beta", "0.5"])
        .env("DFOCK_DEFAULT_CUTOFF", "nope")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_dfock"))
        .args(["channel-entropy", "--beta", "0.5"])
        .env("DFOCK_DEFAULT_CUTOFF", "40")
        .output()
        .unwrap();
    assert!(out.status.success());
}
