//! Moore–Penrose runs on rectangular Hilbert and random matrices.

use std::fmt::Write;
use std::time::Instant;

use hyperinv::checks::{outer_inverse_check, PenroseResiduals};
use hyperinv::decomp::singular_values;
use hyperinv::driver::{iterate, predicted_loops, StopRule, Termination};
use hyperinv::generators::{geometric_spectrum, seeded_rng, with_singular_values};
use hyperinv::init::{init_pan_schreiber, PanSchreiberConvention};
use hyperinv::matrix::{hilbert, DenseMatrix, NormKind};
use hyperinv::scalar::{Ext, Precision, Real, Scalar};
use hyperinv::scheme::SchemeId;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::to_csv;

pub const DEFAULT_SIZES: [(usize, usize); 2] = [(8, 6), (12, 9)];
pub const DEFAULT_EPSILONS: [f64; 1] = [1e-12];
pub const BENCH_SCHEMES: [SchemeId; 4] = [SchemeId::Sm, SchemeId::Cm, SchemeId::Hm, SchemeId::Pm];
/// Precision used to measure condition numbers.
const KAPPA_DIGITS: u32 = 60;

#[derive(Clone, Debug, Serialize)]
pub struct PenroseRun {
    pub scheme: SchemeId,
    pub loops: usize,
    pub total_matmuls: usize,
    pub terminated: Termination,
    pub residuals: PenroseResiduals<f64>,
    pub x_norm: f64,
    /// Largest residual over `‖X‖_F`.
    pub relative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Pan–Schreiber start, reliable stopping rule in the Frobenius norm, then
/// the four Penrose residuals of the result.
pub fn pseudoinverse_run<T: Scalar>(
    a: &DenseMatrix<T>,
    scheme: SchemeId,
    eps: f64,
) -> Result<PenroseRun> {
    let prec = a.precision();
    let init = init_pan_schreiber(a, None, PanSchreiberConvention::Classical)?;
    let eps = T::Real::parse_decimal(&format!("{eps:e}"), prec)
        .unwrap_or_else(|| T::Real::from_f64(eps, prec));
    let stop = StopRule::reliable(scheme.order(), init.alpha_abs(), eps, NormKind::Frobenius);
    let (report, error) = match iterate(scheme, a, &init.x0, &stop) {
        Ok(r) => (r, None),
        Err(f) => (*f.report, Some(f.error.to_string())),
    };
    let residuals = outer_inverse_check(a, &report.x, NormKind::Frobenius)?.to_f64();
    let x_norm = report.x.norm_fro().to_f64();
    Ok(PenroseRun {
        scheme,
        loops: report.loops,
        total_matmuls: report.total_matmuls(),
        terminated: report.terminated,
        relative: residuals.max() / x_norm,
        residuals,
        x_norm,
        error,
    })
}

/// 2-norm condition number of the Hilbert matrix, measured at 60 digits.
pub fn hilbert_condition(m: usize, n: usize) -> Result<f64> {
    let sv = singular_values(&hilbert::<Ext>(m, n, Precision::extended(KAPPA_DIGITS)))?;
    Ok(sv[0].to_f64() / sv[sv.len() - 1].to_f64())
}

#[derive(Clone, Debug, Serialize)]
pub struct HilbertRow {
    /// `hilbert` or `random-<i>`.
    pub matrix: String,
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    #[serde(flatten)]
    pub run: PenroseRun,
    #[serde(skip)]
    pub millis: f64,
}

/// Instances per shape: the Hilbert matrix, then `random` full-rank
/// matrices with `κ = 10^U(2, 6)` drawn from `seed`.
fn instances(
    sizes: &[(usize, usize)],
    random: usize,
    seed: u64,
) -> Result<Vec<(String, DenseMatrix<f64>)>> {
    let mut rng = seeded_rng(seed);
    let mut out = Vec::new();
    for &(m, n) in sizes {
        out.push((
            "hilbert".to_string(),
            hilbert::<f64>(m, n, Precision::Double),
        ));
        for i in 0..random {
            let kappa = 10f64.powf(rng.random_range(2.0..6.0));
            let a = with_singular_values(m, n, &geometric_spectrum(m.min(n), kappa), &mut rng)?;
            out.push((format!("random-{i}"), a));
        }
    }
    Ok(out)
}

/// Every (instance, ε, scheme) combination, fanned out over the worker pool
/// and returned in input order. `digits == 0` runs at double precision;
/// otherwise Hilbert matrices are formed exactly at that precision and random
/// ones are widened from double.
pub fn hilbert_bench(
    sizes: &[(usize, usize)],
    epsilons: &[f64],
    schemes: &[SchemeId],
    digits: u32,
    random: usize,
    seed: u64,
) -> Result<Vec<HilbertRow>> {
    let matrices = instances(sizes, random, seed)?;
    let mut jobs = Vec::new();
    for (label, a) in &matrices {
        for &eps in epsilons {
            for &s in schemes {
                jobs.push((label, a, eps, s));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(label, a, eps, scheme)| {
            let t = Instant::now();
            let (m, n) = a.shape();
            let run = if digits == 0 {
                pseudoinverse_run(a, scheme, eps)?
            } else {
                let prec = Precision::extended(digits);
                let wide = if label == "hilbert" {
                    hilbert::<Ext>(m, n, prec)
                } else {
                    a.convert::<Ext>(prec)
                };
                pseudoinverse_run(&wide, scheme, eps)?
            };
            Ok(HilbertRow {
                matrix: label.clone(),
                m,
                n,
                eps,
                run,
                millis: t.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

pub fn render_hilbert(rows: &[HilbertRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>7} {:>8} {:<10} {:>5} {:>7} {:>10} {:>10} {:>10} {:>10} {:>10}  status",
        "matrix",
        "size",
        "eps",
        "scheme",
        "loops",
        "matmul",
        "XAX-X",
        "AXA-A",
        "(AX)*-AX",
        "(XA)*-XA",
        "ms"
    );
    for r in rows {
        let p = &r.run;
        let status = p.error.clone().unwrap_or_else(|| p.terminated.to_string());
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>8.0e} {:<10} {:>5} {:>7} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.1}  {status}",
            r.matrix,
            format!("{}x{}", r.m, r.n),
            r.eps,
            p.scheme.to_string(),
            p.loops,
            p.total_matmuls,
            p.residuals.outer,
            p.residuals.inner,
            p.residuals.sym_ax,
            p.residuals.sym_xa,
            r.millis
        );
    }
    out
}

pub fn hilbert_csv(rows: &[HilbertRow]) -> Result<String> {
    #[derive(Serialize)]
    struct Line {
        matrix: String,
        m: usize,
        n: usize,
        eps: f64,
        scheme: String,
        loops: usize,
        total_matmuls: usize,
        terminated: Termination,
        outer: f64,
        inner: f64,
        sym_ax: f64,
        sym_xa: f64,
        relative: f64,
    }
    let lines: Vec<Line> = rows
        .iter()
        .map(|r| {
            let p = &r.run;
            Line {
                matrix: r.matrix.clone(),
                m: r.m,
                n: r.n,
                eps: r.eps,
                scheme: p.scheme.to_string(),
                loops: p.loops,
                total_matmuls: p.total_matmuls,
                terminated: p.terminated,
                outer: p.residuals.outer,
                inner: p.residuals.inner,
                sym_ax: p.residuals.sym_ax,
                sym_xa: p.residuals.sym_xa,
                relative: p.relative,
            }
        })
        .collect();
    to_csv(&lines)
}

/// One instance of the Moore–Penrose suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteCase {
    pub label: String,
    pub kappa: f64,
    pub loop_bound: f64,
    pub run: PenroseRun,
}

impl SuiteCase {
    pub fn passed(&self, tol: f64) -> bool {
        self.run.terminated == Termination::Converged
            && self.run.relative <= tol
            && self.run.loops as f64 <= self.loop_bound
    }
}

/// Digits used for the Hilbert members of the suite; their condition
/// numbers (4.5e6 and 6.4e10) leave too little headroom at double precision.
pub const SUITE_HILBERT_DIGITS: u32 = 40;
pub const SUITE_RANDOM: usize = 50;
pub const SUITE_EPS: f64 = 1e-12;

/// PM with Pan–Schreiber start on hilbert(8,6), hilbert(12,9) and
/// [`SUITE_RANDOM`] random 50×40 matrices with `κ = 10^U(2, 6)`. The loop
/// bound is `predicted_loops(κ, 18) + 3`.
pub fn penrose_suite(seed: u64) -> Result<Vec<SuiteCase>> {
    let bound = |kappa: f64| predicted_loops(kappa, 18).map(|p| p + 3.0);
    let mut cases = Vec::new();
    let prec = Precision::extended(SUITE_HILBERT_DIGITS);
    for (m, n) in DEFAULT_SIZES {
        let kappa = hilbert_condition(m, n)?;
        cases.push(SuiteCase {
            label: format!("hilbert({m},{n}) @ {SUITE_HILBERT_DIGITS} digits"),
            kappa,
            loop_bound: bound(kappa)?,
            run: pseudoinverse_run(&hilbert::<Ext>(m, n, prec), SchemeId::Pm, SUITE_EPS)?,
        });
    }
    let mut rng = seeded_rng(seed);
    let instances: Vec<(f64, DenseMatrix<f64>)> = (0..SUITE_RANDOM)
        .map(|_| {
            let kappa = 10f64.powf(rng.random_range(2.0..6.0));
            let a = with_singular_values(50, 40, &geometric_spectrum(40, kappa), &mut rng)?;
            Ok((kappa, a))
        })
        .collect::<Result<_>>()?;
    let random: Vec<SuiteCase> = instances
        .into_par_iter()
        .enumerate()
        .map(|(i, (kappa, a))| {
            Ok(SuiteCase {
                label: format!("random #{i}"),
                kappa,
                loop_bound: bound(kappa)?,
                run: pseudoinverse_run(&a, SchemeId::Pm, SUITE_EPS)?,
            })
        })
        .collect::<Result<_>>()?;
    cases.extend(random);
    Ok(cases)
}
