//! GMRES iteration counts under different approximate-inverse
//! preconditioners.

use std::fmt::Write;
use std::time::Instant;

use hyperinv::gmres::{gmres, GmresConfig};
use hyperinv::precond::{build_preconditioner, jacobi, COMPARISON_LOOPS};
use hyperinv::sparse::CsrMatrix;
use log::{info, warn};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::to_csv;

pub const DEFAULT_TOLS: [f64; 9] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];
pub const DEFAULT_MAX_ITERS: usize = 5000;

#[derive(Clone, Debug, Serialize)]
pub struct Setup {
    pub name: String,
    /// Hyperpower loops used to build it.
    pub loops: Option<usize>,
    pub nnz: Option<usize>,
    #[serde(skip)]
    pub build_millis: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveRow {
    pub config: String,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub true_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub config: String,
    pub tol: f64,
    pub iteration: usize,
    pub preconditioned_residual: f64,
    /// Present at the end of each restart cycle.
    pub true_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecondBench {
    pub n: usize,
    pub nnz: usize,
    pub restart: usize,
    pub drop_tol: f64,
    pub setups: Vec<Setup>,
    pub rows: Vec<SolveRow>,
    pub curves: Vec<CurvePoint>,
}

impl PrecondBench {
    /// Iteration count of `config` at `tol`, if it converged.
    pub fn iterations(&self, config: &str, tol: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.tol == tol && r.converged)
            .map(|r| r.iterations)
    }
}

/// Solves `Ax = b` at each tolerance with no preconditioner, Jacobi, and
/// `X₅` of SM, `X₃` of CM and `X₁` of PM built with `drop_tol`.
pub fn precond_bench(
    a: &CsrMatrix<Complex64>,
    b: &[Complex64],
    tols: &[f64],
    restart: usize,
    drop_tol: f64,
) -> Result<PrecondBench> {
    let mut setups = vec![Setup {
        name: "none".into(),
        loops: None,
        nnz: None,
        build_millis: 0.0,
        error: None,
    }];
    let mut operators: Vec<Option<CsrMatrix<Complex64>>> = vec![None];
    let t = Instant::now();
    match jacobi(a) {
        Ok(m) => {
            setups.push(Setup {
                name: "jacobi".into(),
                loops: None,
                nnz: Some(m.nnz()),
                build_millis: t.elapsed().as_secs_f64() * 1e3,
                error: None,
            });
            operators.push(Some(m));
        }
        Err(e) => {
            warn!("jacobi: {e}");
            setups.push(Setup {
                name: "jacobi".into(),
                loops: None,
                nnz: None,
                build_millis: 0.0,
                error: Some(e.to_string()),
            });
            operators.push(None);
        }
    }
    for (scheme, loops) in COMPARISON_LOOPS {
        info!("building {scheme} preconditioner with {loops} loops");
        let t = Instant::now();
        let name = format!("{scheme}-X{loops}");
        match build_preconditioner(a, scheme, loops, drop_tol) {
            Ok(m) => {
                setups.push(Setup {
                    name,
                    loops: Some(loops),
                    nnz: Some(m.nnz()),
                    build_millis: t.elapsed().as_secs_f64() * 1e3,
                    error: None,
                });
                operators.push(Some(m));
            }
            Err(e) => {
                warn!("{name}: {e}");
                setups.push(Setup {
                    name,
                    loops: Some(loops),
                    nnz: None,
                    build_millis: 0.0,
                    error: Some(e.to_string()),
                });
                operators.push(None);
            }
        }
    }

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &tol in tols {
        for (setup, m) in setups.iter().zip(&operators) {
            if setup.error.is_some() {
                continue;
            }
            let cfg = GmresConfig {
                restart,
                tol,
                max_iters: DEFAULT_MAX_ITERS,
                preconditioner: m.as_ref(),
            };
            let rep = gmres(a, b, &cfg)?;
            for (i, r) in rep.residual_history.iter().enumerate() {
                let true_residual = rep
                    .restarts
                    .iter()
                    .find(|c| c.iteration == i + 1)
                    .map(|c| c.true_residual);
                curves.push(CurvePoint {
                    config: setup.name.clone(),
                    tol,
                    iteration: i + 1,
                    preconditioned_residual: *r,
                    true_residual,
                });
            }
            rows.push(SolveRow {
                config: setup.name.clone(),
                tol,
                iterations: rep.iterations,
                converged: rep.converged,
                stagnated: rep.stagnated,
                true_residual: rep.final_true_residual(),
            });
        }
    }
    Ok(PrecondBench {
        n: a.rows(),
        nnz: a.nnz(),
        restart,
        drop_tol,
        setups,
        rows,
        curves,
    })
}

impl PrecondBench {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "n = {}, nnz = {}, GMRES({}), drop tolerance {:e}",
            self.n, self.nnz, self.restart, self.drop_tol
        );
        for s in &self.setups {
            match (&s.error, s.nnz) {
                (Some(e), _) => {
                    let _ = writeln!(out, "  {:<8} build failed: {e}", s.name);
                }
                (None, Some(nnz)) => {
                    let _ = writeln!(
                        out,
                        "  {:<8} nnz {nnz:>7}  built in {:.1} ms",
                        s.name, s.build_millis
                    );
                }
                (None, None) => {}
            }
        }
        let names: Vec<&str> = self
            .setups
            .iter()
            .filter(|s| s.error.is_none())
            .map(|s| s.name.as_str())
            .collect();
        let _ = write!(out, "{:>8}", "tol");
        for n in &names {
            let _ = write!(out, " {n:>8}");
        }
        out.push('\n');
        let mut tols: Vec<f64> = self.rows.iter().map(|r| r.tol).collect();
        tols.dedup();
        for tol in tols {
            let _ = write!(out, "{tol:>8.0e}");
            for n in &names {
                let cell = self
                    .rows
                    .iter()
                    .find(|r| r.tol == tol && r.config == *n)
                    .map(|r| format!("{}{}", r.iterations, if r.converged { "" } else { "*" }))
                    .unwrap_or_default();
                let _ = write!(out, " {cell:>8}");
            }
            out.push('\n');
        }
        if self.rows.iter().any(|r| !r.converged) {
            out.push_str("* did not converge\n");
        }
        out
    }

    pub fn rows_csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn curves_csv(&self) -> Result<String> {
        to_csv(&self.curves)
    }
}
