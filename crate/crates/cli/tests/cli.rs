use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use incompat::quantum::noisy_pauli_assemblage;
use incompat_cli::format::{self, Assemblage};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn incompat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incompat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("JSON report")
}

#[test]
fn ho_fixture_is_not_violated() {
    for f in ["wysi", "l2"] {
        let o = incompat(&[
            "witness",
            fixture("ho.json").to_str().unwrap(),
            "--functional",
            f,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let r = report(&o);
        assert_eq!(r["violation"], 0.0);
        assert_eq!(r["functional"], f);
    }
}

#[test]
fn noisy_pauli_fixture_certifies_with_exit_two() {
    let o = incompat(&[
        "witness",
        fixture("noisy_pauli_w0.json").to_str().unwrap(),
        "--functional",
        "l2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&o);
    assert!((r["violation"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    for key in [
        "g_as",
        "F_as",
        "x_star",
        "x_lower",
        "violation",
        "functional",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["x_star"], 1);
}

#[test]
fn nonhermitian_element_is_named() {
    let o = incompat(&[
        "witness",
        fixture("nonhermitian.json").to_str().unwrap(),
        "--functional",
        "wysi",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("\"1:0\""), "{err}");
    assert!(err.contains("line 9"), "{err}");
}

#[test]
fn context_flags_override_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("x_basis.json");
    std::fs::write(
        &basis,
        "[[[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]], [[[0.5,0],[-0.5,0]],[[-0.5,0],[0.5,0]]]]",
    )
    .unwrap();
    let o = incompat(&[
        "witness",
        fixture("ho.json").to_str().unwrap(),
        "--functional",
        "l2",
        "--basis",
        basis.to_str().unwrap(),
    ]);
    let r = report(&o);
    // HO fixture states are |0><0| and |1><1|, fully coherent in the X basis
    let (g, f) = (
        r["g_as"][0].as_f64().unwrap(),
        r["F_as"][0].as_f64().unwrap(),
    );
    assert!((g - 0.5).abs() < 1e-12 && (f - 0.5).abs() < 1e-12);
    assert_eq!(o.status.code(), Some(0));

    let obs = dir.path().join("x.json");
    std::fs::write(&obs, "[[[0,0],[1,0]],[[1,0],[0,0]]]").unwrap();
    let o = incompat(&[
        "witness",
        fixture("noisy_pauli_w0.json").to_str().unwrap(),
        "--functional",
        "wysi",
        "--observable",
        obs.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!((report(&o)["violation"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn measurement_file_is_searched_over_states() {
    let m = noisy_pauli_assemblage(0.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, format::to_json(&Assemblage::Measurement(m), None)).unwrap();
    let o = incompat(&["witness", path.to_str().unwrap(), "--functional", "l2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = report(&o);
    assert!(r["violation"].as_f64().unwrap() > 0.4);
    assert!(r["rho_b"].is_array());
}

#[test]
fn files_round_trip() {
    for name in ["ho.json", "noisy_pauli_w0.json"] {
        let source = std::fs::read_to_string(fixture(name)).unwrap();
        let parsed = format::parse(&source).unwrap();
        let written = format::to_json(&parsed.assemblage, parsed.context.as_ref());
        let again = format::parse(&written).unwrap();
        assert_eq!(
            format::to_json(&again.assemblage, again.context.as_ref()),
            written
        );
        assert_eq!(
            format::to_file(&again.assemblage, again.context.as_ref()),
            serde_json::from_str(&source).unwrap()
        );
    }
}

#[test]
fn threshold_commands() {
    let o = incompat(&["threshold", "mn"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.292893218813");
    let o = incompat(&["threshold", "mi"]);
    let t: f64 = stdout(&o).trim().parse().unwrap();
    assert!((t - 0.213).abs() < 0.005);
    let o = incompat(&["threshold", "scan", "--functional", "l2", "--theta", "pi/4"]);
    assert_eq!(stdout(&o).trim(), "0.292893218813");
    let o = incompat(&["threshold", "mn", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

fn small_scan(panel: &str, outer: &str, threads: &str, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incompat"))
        .env("INCOMPAT_THREADS", threads)
        .args([
            "scan",
            panel,
            outer,
            "--w",
            "0:1:11",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap()
}

#[test]
fn scans_are_byte_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(small_scan("steering", "--theta=0:pi/2:11", "1", &a)
        .status
        .success());
    assert!(small_scan("steering", "--theta=0:pi/2:11", "4", &b)
        .status
        .success());
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("theta,w,wysi,l2"));
    assert_eq!(text.lines().count(), 1 + 121);
}

#[test]
fn instrument_scan_has_zero_rows_at_the_ends() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.csv");
    let o = small_scan("instrument", "--gamma=0:1:3", "2", &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("crossings"));
    let text = std::fs::read_to_string(out).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0] == "0" || f[0] == "1" {
            assert_eq!(&f[2..], ["0", "0"], "{line}");
        }
        if f[0] == "0.5" && f[1] == "0" {
            assert_eq!(&f[2..], ["1", "0.5"]);
        }
    }
}

#[test]
fn scan_errors_exit_one() {
    let o = incompat(&["scan", "steering", "--w", "0:2:5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = incompat(&[
        "scan",
        "steering",
        "--theta",
        "0:1:3",
        "--w",
        "0:1:3",
        "--out",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = incompat(&["scan", "steering", "--gamma", "0:1:3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(incompat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        incompat(&["witness", "x.json", "--functional", "qfi"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(incompat(&["--help"]).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_incompat"))
        .env("INCOMPAT_THREADS", "many")
        .args(["threshold", "mn"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn selftest_quick_passes_and_detects_corrupted_fixtures() {
    let o = incompat(&["selftest", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    for name in ["ho.json", "noisy_pauli_w0.json", "nonhermitian.json"] {
        std::fs::copy(fixture(name), dir.path().join(name)).unwrap();
    }
    // a Hermitian replacement makes the malformed fixture parse
    std::fs::copy(fixture("ho.json"), dir.path().join("nonhermitian.json")).unwrap();
    let o = incompat(&[
        "selftest",
        "--quick",
        "--fixtures",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL fixtures"));
}
