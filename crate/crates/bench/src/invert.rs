//! General-purpose entry point: read a matrix, iterate, check, write.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hyperinv::checks::{drazin_check, outer_inverse_check};
use hyperinv::driver::{iterate, ReportSummary, StopRule};
use hyperinv::init::{InitStrategy, StrategySpec};
use hyperinv::matrix::{DenseMatrix, NormKind};
use hyperinv::mtx::{read_dense, write_dense_file, Field, MtxFile};
use hyperinv::scalar::{Ext, Precision, Real, Scalar};
use hyperinv::scheme::SchemeId;
use num_complex::Complex;
use serde::Serialize;

use crate::config::RuleKind;
use crate::error::{BenchError, Result};

pub const DEFAULT_CHECK_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct InvertRequest {
    pub matrix: PathBuf,
    pub scheme: SchemeId,
    pub init: StrategySpec,
    pub eps: f64,
    /// 0 selects double precision.
    pub digits: u32,
    pub norm: NormKind,
    /// Defaults to the step rule for the Drazin start and the reliable rule
    /// otherwise.
    pub rule: Option<RuleKind>,
    pub max_loops: Option<usize>,
    pub check_tol: f64,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvertOutcome {
    pub report: ReportSummary,
    /// `penrose`, `drazin` or `outer`.
    pub check: &'static str,
    pub residuals: BTreeMap<&'static str, f64>,
    pub x_norm: f64,
    pub check_tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn load_strategy<T: Scalar>(spec: &StrategySpec, prec: Precision) -> Result<InitStrategy<T>> {
    Ok(match spec {
        StrategySpec::Adjoint => InitStrategy::ScaledAdjoint,
        StrategySpec::PanSchreiber => InitStrategy::pan_schreiber(),
        StrategySpec::Drazin => InitStrategy::DrazinTrace,
        StrategySpec::Diagonal => InitStrategy::Diagonal,
        StrategySpec::Explicit { path, alpha } => InitStrategy::Explicit {
            g: read_dense(path, prec)?,
            alpha: T::from_f64(*alpha, prec),
        },
    })
}

fn decimal<R: Real>(v: f64, prec: Precision) -> R {
    R::parse_decimal(&format!("{v:e}"), prec).unwrap_or_else(|| R::from_f64(v, prec))
}

fn run<T: Scalar>(a: DenseMatrix<T>, req: &InvertRequest) -> Result<InvertOutcome> {
    let prec = a.precision();
    let init = load_strategy::<T>(&req.init, prec)?.apply(&a)?;
    let eps = decimal::<T::Real>(req.eps, prec);
    let rule = req.rule.unwrap_or(match req.init {
        StrategySpec::Drazin => RuleKind::Step,
        _ => RuleKind::Reliable,
    });
    let mut stop = match rule {
        RuleKind::Reliable => {
            StopRule::reliable(req.scheme.order(), init.alpha_abs(), eps, req.norm)
        }
        RuleKind::Step => StopRule::step(eps, req.norm),
        RuleKind::RelativeStep => StopRule::relative_step(eps, req.norm),
        RuleKind::Residual => StopRule::residual(eps, req.norm),
    };
    if let Some(m) = req.max_loops {
        stop = stop.with_max_loops(m);
    }
    let (report, error) = match iterate(req.scheme, &a, &init.x0, &stop) {
        Ok(r) => (r, None),
        Err(f) => (*f.report, Some(f.error.to_string())),
    };
    let x = &report.x;
    let mut residuals = BTreeMap::new();
    let check = match (&req.init, &init.index) {
        (StrategySpec::Drazin, Some(idx)) => {
            let r = drazin_check(&a, x, idx.index as u32, req.norm)?;
            residuals.insert("outer", r.outer.to_f64());
            residuals.insert("commute", r.commute.to_f64());
            residuals.insert("index", r.index.to_f64());
            "drazin"
        }
        (StrategySpec::Explicit { .. }, _) => {
            let r = outer_inverse_check(&a, x, req.norm)?;
            residuals.insert("outer", r.outer.to_f64());
            "outer"
        }
        _ => {
            let r = outer_inverse_check(&a, x, req.norm)?.to_f64();
            residuals.insert("outer", r.outer);
            residuals.insert("inner", r.inner);
            residuals.insert("sym_ax", r.sym_ax);
            residuals.insert("sym_xa", r.sym_xa);
            "penrose"
        }
    };
    let x_norm = x.norm_fro().to_f64();
    let worst = residuals.values().copied().fold(0.0, f64::max);
    let passed = error.is_none() && report.converged() && worst <= req.check_tol * x_norm.max(1.0);
    let output = match &req.out {
        Some(path) => {
            write_dense_file(path, x)?;
            Some(path.clone())
        }
        None => None,
    };
    Ok(InvertOutcome {
        report: report.summary(),
        check,
        residuals,
        x_norm,
        check_tol: req.check_tol,
        passed,
        error,
        output,
    })
}

fn open(path: &Path) -> Result<MtxFile> {
    let file = std::fs::File::open(path).map_err(|source| BenchError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MtxFile::parse(file)?)
}

/// Reads the matrix in the field and precision the request asks for and
/// runs it. `passed` is true iff the run converged and every relevant
/// residual is at most `check_tol·max(1, ‖X‖_F)`.
pub fn invert(req: &InvertRequest) -> Result<InvertOutcome> {
    let file = open(&req.matrix)?;
    let complex = file.header.field == Field::Complex;
    if req.digits == 0 {
        let prec = Precision::Double;
        if complex {
            run(file.to_dense::<Complex<f64>>(prec)?, req)
        } else {
            run(file.to_dense::<f64>(prec)?, req)
        }
    } else {
        let prec = Precision::extended(req.digits);
        if complex {
            run(file.to_dense::<Complex<Ext>>(prec)?, req)
        } else {
            run(file.to_dense::<Ext>(prec)?, req)
        }
    }
}

/// JSON object written when `invert` cannot produce a report.
pub fn error_json(e: &BenchError) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}
