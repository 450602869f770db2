use std::path::Path;
use std::process::{Command, Output};

use hyperinv::generators::drazin_example;
use hyperinv::matrix::{hilbert, DenseMatrix};
use hyperinv::mtx::write_dense_file;
use hyperinv::scalar::Precision;
use serde_json::Value;

const D: Precision = Precision::Double;

fn hyperinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperinv"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_coeffs_exit_code_follows_the_checks() {
    let ok = hyperinv(&["verify-coeffs"]);
    assert!(ok.status.success());
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text.contains("a3   = 1/2"), "{text}");
    let bad = hyperinv(&["verify-coeffs", "--perturb", "psi=1e-6"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAILED"));
    assert_eq!(
        hyperinv(&["verify-coeffs", "--perturb", "zeta=1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn same_config_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"schemes": ["PM", "CM"], "sizes": [[8, 6]], "epsilons": [1e-10, 1e-12]}"#,
    )
    .unwrap();
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = hyperinv(&["--config", path(&cfg), "--out", path(&out), "hilbert-bench"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(out.join("hilbert_bench.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.starts_with("hilbert,8,6,")));

    // Flags override the file.
    let out = dir.path().join("c");
    let o = hyperinv(&[
        "--config",
        path(&cfg),
        "--out",
        path(&out),
        "--scheme",
        "SM",
        "hilbert-bench",
    ]);
    assert!(o.status.code().is_some());
    let text = std::fs::read_to_string(out.join("hilbert_bench.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",SM,")), "{text}");
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"shemes": ["PM"]}"#).unwrap();
    let o = hyperinv(&["--config", path(&cfg), "drazin-table"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invert_diagonal_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    write_dense_file(&a, &DenseMatrix::diag(&[2.0, 4.0], D)).unwrap();
    let x = dir.path().join("x.mtx");
    let o = hyperinv(&[
        "invert",
        path(&a),
        "--init",
        "diagonal",
        "--scheme",
        "PM",
        "--out",
        path(&x),
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["report"]["loops"], 1);
    let back = hyperinv::mtx::read_dense::<f64>(&x, D).unwrap();
    assert_eq!(back, DenseMatrix::diag(&[0.5, 0.25], D));
}

#[test]
fn invert_hilbert_pseudoinverse() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("h.mtx");
    write_dense_file(&a, &hilbert::<f64>(8, 6, D)).unwrap();
    let o = hyperinv(&["invert", path(&a), "--digits", "40", "--eps", "1e-20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    assert_eq!(v["check"], "penrose");
    assert_eq!(v["report"]["terminated"], "converged");
}

#[test]
fn invert_drazin_example() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("d.mtx");
    write_dense_file(&a, &drazin_example::<f64>(D)).unwrap();
    let o = hyperinv(&[
        "invert",
        path(&a),
        "--init",
        "drazin",
        "--digits",
        "60",
        "--eps",
        "1e-30",
        "--norm",
        "inf",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    assert_eq!(v["check"], "drazin");
    assert_eq!(v["report"]["loops"], 5);
}

#[test]
fn invert_errors_are_json() {
    let o = hyperinv(&["invert", "/nonexistent/a.mtx"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"], "io");

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("bad.mtx");
    std::fs::write(&a, "%%MatrixMarket matrix array real general\n2 2\n1\nx\n").unwrap();
    let o = hyperinv(&["invert", path(&a)]);
    assert_eq!(json(&o)["error"], "parse");
}

#[test]
fn seed_drives_random_instances() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = hyperinv(&[
            "--seed",
            seed,
            "--out",
            path(&out),
            "--scheme",
            "PM",
            "hilbert-bench",
            "--sizes",
            "12x8",
            "--random",
            "3",
        ]);
        assert!(o.status.success());
        std::fs::read_to_string(out.join("hilbert_bench.csv")).unwrap()
    };
    let a = run("11", "a");
    assert_eq!(a, run("11", "b"));
    assert_ne!(a, run("12", "c"));
    assert_eq!(a.lines().filter(|l| l.starts_with("random-")).count(), 3);
}
