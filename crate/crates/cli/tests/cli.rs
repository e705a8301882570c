use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SQUARE: &str = r#"form = "III"
masses = [1.0, 1.0, 1.0, 1.0]
positions = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
"#;

fn ccdegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccdegen"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let square = write(&dir, "square.toml", SQUARE);
    assert_eq!(ccdegen(&["check", &square]).status.code(), Some(0));
    for form in ["I", "II", "III"] {
        assert_eq!(
            ccdegen(&["check", &square, "--form", form]).status.code(),
            Some(0),
            "{form}"
        );
    }

    let m4 = (81.0 + 64.0 * 3f64.sqrt()) / 249.0;
    let h = 3f64.sqrt() / 2.0;
    let critical = format!(
        "form = \"II\"\nmasses = [1.0, 1.0, 1.0, {m4:?}]\npositions = [[1.0, 0.0], [-0.5, {h:?}], [-0.5, {:?}], [0.0, 0.0]]\n",
        -h
    );
    let critical = write(&dir, "critical.toml", &critical);
    assert_eq!(ccdegen(&["check", &critical]).status.code(), Some(10));

    let skewed = write(
        &dir,
        "skewed.toml",
        &SQUARE.replace("[1.0, 0.0], [0.0, 1.0]", "[1.2, 0.0], [0.0, 1.0]"),
    );
    let o = ccdegen(&["check", &skewed]);
    assert_eq!(o.status.code(), Some(11));
    assert!(stdout(&o).contains("residual_norm"));

    let collision = write(
        &dir,
        "collision.toml",
        &SQUARE.replace("[0.0, 1.0]", "[1.0, 0.0]"),
    );
    assert_eq!(ccdegen(&["check", &collision]).status.code(), Some(1));
    let garbage = write(&dir, "garbage.toml", "masses = [1.0,\n");
    let o = ccdegen(&["check", &garbage]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(
        ccdegen(&["check", "/nonexistent/file.toml"]).status.code(),
        Some(1)
    );
    assert_eq!(
        ccdegen(&["check", &square, "--form", "IV"]).status.code(),
        Some(1)
    );
}

#[test]
fn report_round_trips() {
    let dir = TempDir::new().unwrap();
    let square = write(&dir, "square.toml", SQUARE);
    let first = ccdegen(&["check", &square]);
    let report = write(&dir, "report.toml", &stdout(&first));
    let second = ccdegen(&["check", &report]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));

    let table: toml::Table = stdout(&first).parse().unwrap();
    let masses: Vec<f64> = table["masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_float().unwrap())
        .collect();
    assert_eq!(masses, vec![1.0; 4]);
    let det = table["report"]["det_j2"].as_float().unwrap();
    assert!((det - 4.40641740644382).abs() < 1e-12);
}

#[test]
fn scan_is_byte_identical_and_flags_domain() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = ccdegen(&[
            "scan",
            "--family",
            "rhombus",
            "--form",
            "III",
            "--from",
            "0.5",
            "--to",
            "1.8",
            "--steps",
            "27",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,detJ2,verdict");
    assert_eq!(lines.len(), 28);
    assert!(lines[1].ends_with("domain-error"));
    assert!(lines[27].ends_with("domain-error"));
    assert!(lines[10].ends_with("nondegenerate"));

    let sequential = Command::new(env!("CARGO_BIN_EXE_ccdegen"))
        .env("CCDEGEN_SEQUENTIAL", "1")
        .args([
            "scan", "--family", "rhombus", "--form", "III", "--from", "0.5", "--to", "1.8",
            "--steps", "27",
        ])
        .args(["--out", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(sequential.status.success());
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let o = ccdegen(&[
        "scan",
        "--family",
        "rhombus",
        "--form",
        "III",
        "--from",
        "0.7",
        "--to",
        "1.6",
        "--steps",
        "1",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn triangle_scan_writes_every_step() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let o = ccdegen(&[
        "scan",
        "--family",
        "triangle-center",
        "--form",
        "I",
        "--from",
        "0.2",
        "--to",
        "1.0",
        "--steps",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",nondegenerate")));
}

#[test]
fn triangle_scan_minimum_sits_at_critical_mass() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t2.csv");
    let o = ccdegen(&[
        "scan",
        "--family",
        "triangle-center",
        "--form",
        "II",
        "--from",
        "0.5",
        "--to",
        "1.0",
        "--steps",
        "51",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows: Vec<(f64, f64)> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    // the critical factor is squared, so det touches zero without changing sign
    assert!(rows.iter().all(|r| r.1 >= 0.0));
    let min = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!(
        (min.0 - (81.0 + 64.0 * 3f64.sqrt()) / 249.0).abs() < 0.01,
        "{min:?}"
    );
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.cert");
    let o = ccdegen(&["certify-rhombus", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("ccdegen-rhombus-certificate 1\nstatus certified"));

    let seq = dir.path().join("seq.cert");
    let o = Command::new(env!("CARGO_BIN_EXE_ccdegen"))
        .env("CCDEGEN_SEQUENTIAL", "1")
        .args(["certify-rhombus", "--out", seq.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&seq).unwrap(), text);

    let o = ccdegen(&[
        "certify-rhombus",
        "--max-depth",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(20));
    assert!(stdout(&o).contains("failed in regime A"));

    let bad = Path::new("/nonexistent-dir/r.cert");
    assert_eq!(
        ccdegen(&["certify-rhombus", "--out", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn eig_counts_trivial_zeros() {
    let dir = TempDir::new().unwrap();
    let square = write(&dir, "square.toml", SQUARE);
    for (form, k) in [("I", 2), ("II", 3), ("III", 4)] {
        let o = ccdegen(&["eig", &square, "--form", form]);
        assert!(o.status.success());
        let text = stdout(&o);
        assert_eq!(
            text.lines().filter(|l| l.ends_with("near-zero")).count(),
            k,
            "{form}\n{text}"
        );
        assert_eq!(
            text.lines()
                .filter(|l| l.ends_with('i') || l.ends_with("near-zero"))
                .count(),
            8
        );
    }
}
