use hyperinv::checks::{drazin_check, outer_inverse_check};
use hyperinv::driver::{iterate, predicted_loops, StopRule, Termination};
use hyperinv::generators::{drazin_example, seeded_rng, shifted_laplacian, LAPLACIAN_SHIFT};
use hyperinv::init::{init_drazin, init_pan_schreiber, PanSchreiberConvention};
use hyperinv::matrix::{hilbert, DenseMatrix, NormKind};
use hyperinv::mtx::{read_csr, read_dense, read_vector, write_csr_file, write_dense_file, MtxFile};
use hyperinv::scalar::{Ext, Precision};
use hyperinv::scheme::SchemeId;
use hyperinv::sparse::sparsify;
use num_complex::Complex64;
use rand::Rng;

const D: Precision = Precision::Double;

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hyperinv-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn dense_and_sparse_files_round_trip_bit_exactly() {
    let dir = scratch_dir("mtx");
    let mut rng = seeded_rng(21);
    let a = DenseMatrix::from_fn(7, 4, D, |_, _| rng.random_range(-1e3..1e3) / 7.0);
    write_dense_file(dir.join("a.mtx"), &a).unwrap();
    assert_eq!(read_dense::<f64>(dir.join("a.mtx"), D).unwrap(), a);

    let lap = shifted_laplacian(6, LAPLACIAN_SHIFT);
    write_csr_file(dir.join("lap.mtx"), &lap).unwrap();
    let back = read_csr::<Complex64>(dir.join("lap.mtx"), D).unwrap();
    assert_eq!(back.to_dense(), lap.to_dense());

    let prec = Precision::extended(60);
    let h = hilbert::<Ext>(3, 3, prec);
    write_dense_file(dir.join("h.mtx"), &h).unwrap();
    assert_eq!(read_dense::<Ext>(dir.join("h.mtx"), prec).unwrap(), h);

    let col = DenseMatrix::from_fn(5, 1, D, |i, _| i as f64 + 0.5);
    write_dense_file(dir.join("b.mtx"), &col).unwrap();
    assert_eq!(
        read_vector::<f64>(dir.join("b.mtx"), D).unwrap(),
        col.data()
    );
    assert!(read_vector::<f64>(dir.join("a.mtx"), D).is_err());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn symmetric_coordinate_file_expands() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n3 2 -1\n3 3 2\n";
    let a = MtxFile::parse(text.as_bytes())
        .unwrap()
        .to_csr::<f64>(D)
        .unwrap();
    assert_eq!(a.nnz(), 6);
    assert_eq!(a.get(0, 1), -1.0);
    assert_eq!(a.get(1, 2), -1.0);
    assert_eq!(a.get(1, 1), 0.0);
}

#[test]
fn malformed_entry_reports_its_line() {
    let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 3.0\n";
    let err = MtxFile::parse(text.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn pm_inverts_a_diagonal_in_one_loop() {
    let a = DenseMatrix::diag(&[2.0, 4.0], D);
    let x0 = DenseMatrix::diag(&[0.5, 0.25], D);
    let rep = iterate(
        SchemeId::Pm,
        &a,
        &x0,
        &StopRule::step(1e-12, NormKind::Frobenius),
    )
    .unwrap();
    assert!(rep.converged());
    assert_eq!(rep.loops, 1);
    assert_eq!(rep.x, x0);
}

/// Ill-conditioned starts grow the step norm for several loops; that is not
/// divergence.
#[test]
fn early_growth_is_not_divergence() {
    let a = hilbert::<f64>(8, 6, D);
    let init = init_pan_schreiber(&a, None, PanSchreiberConvention::Classical).unwrap();
    let stop = StopRule::reliable(18, init.alpha_abs(), 1e-12, NormKind::Frobenius);
    let rep = iterate(SchemeId::Pm, &a, &init.x0, &stop).unwrap();
    assert_eq!(rep.terminated, Termination::Converged);
    let steps = rep.step_norms();
    let peak = steps.iter().copied().fold(0.0, f64::max);
    assert!(peak > 1e5 * steps[0]);
    let r = outer_inverse_check(&a, &rep.x, NormKind::Frobenius).unwrap();
    assert!(r.max() <= 1e-8 * rep.x.norm_fro());
    let kappa = 4.48e6;
    assert!(rep.loops as f64 <= predicted_loops(kappa, 18).unwrap() + 3.0);
}

#[test]
fn post_convergence_growth_is_flagged() {
    // Plain PM on a rank-deficient matrix drifts once converged.
    let run = hyperinv::stability::stability_run(Some(2024), 0).unwrap();
    let (a, _) = hyperinv::stability::test_matrix(Some(2024));
    let start = a.transpose().scale(&0.5);
    let stop = StopRule::step(0.0, NormKind::Frobenius).with_max_loops(60);
    let rep = iterate(SchemeId::Pm, &a, &start, &stop);
    let terminated = match rep {
        Ok(r) => r.terminated,
        Err(f) => f.report.terminated,
    };
    assert_ne!(terminated, Termination::Converged);
    assert!(run.handover_loop >= 1);
}

#[test]
fn drazin_example_at_double_precision() {
    let a = drazin_example::<f64>(D);
    let init = init_drazin(&a).unwrap();
    let idx = init.index.clone().unwrap();
    assert_eq!(idx.index, 3);
    assert_eq!(idx.rank_sequence, vec![12, 10, 9, 8, 8]);
    // Roundoff floors the step norm near 4e-9 at double precision.
    let rep = iterate(
        SchemeId::Pm,
        &a,
        &init.x0,
        &StopRule::step(1e-8, NormKind::Infinity),
    )
    .unwrap();
    assert!(rep.converged());
    let strict = iterate(
        SchemeId::Pm,
        &a,
        &init.x0,
        &StopRule::step(1e-12, NormKind::Infinity),
    )
    .unwrap();
    assert_eq!(strict.terminated, Termination::DivergenceDetected);
    let r = drazin_check(&a, &rep.x, 3, NormKind::Infinity).unwrap();
    assert!(r.max() <= 1e-8, "{:?}", r);
}

#[test]
fn sparsified_identity_survives() {
    let i = DenseMatrix::<f64>::identity(4, D);
    assert_eq!(sparsify(&i, 0.5).nnz(), 4);
    assert_eq!(sparsify(&i, 1.0).nnz(), 0);
}
