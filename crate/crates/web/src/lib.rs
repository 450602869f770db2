//! WebAssembly bindings for the demo page. Each export returns JSON.

use hyperinv::driver::{iterate, StopRule, Termination};
use hyperinv::error::Result;
use hyperinv::init::{init_pan_schreiber, PanSchreiberConvention};
use hyperinv::matrix::{hilbert, DenseMatrix, NormKind};
use hyperinv::scalar::{Ext, Precision, Real, Scalar};
use hyperinv::scheme::{scheme_step, SchemeId};
use hyperinv::stability::{stability_run, StabilityRun, CONTINUATION_LOOPS};
use num_traits::Zero;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest Hilbert dimension the page accepts.
pub const MAX_DIM: usize = 24;
/// Loops allowed per scheme in the Hilbert demo.
pub const MAX_LOOPS: usize = 200;

/// `log10|r|`, or `-inf` for zero; exact for values outside the f64 range.
fn log10<R: Real>(r: &R) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    r.abs().ln().to_f64() / std::f64::consts::LN_10
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub scheme: SchemeId,
    pub loops: usize,
    pub terminated: Termination,
    /// `log10‖X_{k+1} − X_k‖_F` per loop.
    pub log_steps: Vec<f64>,
    pub total_matmuls: usize,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct HilbertCurves {
    pub m: usize,
    pub n: usize,
    pub digits: u32,
    pub curves: Vec<Curve>,
}

fn curve<T: Scalar>(a: &DenseMatrix<T>, scheme: SchemeId, eps: f64) -> Result<Curve> {
    let prec = a.precision();
    let init = init_pan_schreiber(a, None, PanSchreiberConvention::Classical)?;
    let stop = StopRule::reliable(
        scheme.order(),
        init.alpha_abs(),
        T::Real::from_f64(eps, prec),
        NormKind::Frobenius,
    )
    .with_max_loops(MAX_LOOPS);
    let (report, error) = match iterate(scheme, a, &init.x0, &stop) {
        Ok(r) => (r, None),
        Err(f) => (*f.report, Some(f.error.to_string())),
    };
    Ok(Curve {
        scheme,
        loops: report.loops,
        terminated: report.terminated,
        log_steps: report.step_norms().iter().map(log10).collect(),
        total_matmuls: report.total_matmuls(),
        error,
    })
}

/// Step-norm histories of the pseudoinverse iteration on `hilbert(m, n)`
/// for each scheme. `digits == 0` runs at double precision.
pub fn hilbert_curves(
    m: usize,
    n: usize,
    digits: u32,
    eps: f64,
    schemes: &[SchemeId],
) -> Result<HilbertCurves> {
    if m == 0 || n == 0 || m > MAX_DIM || n > MAX_DIM {
        return Err(hyperinv::error::Error::InvalidInput(format!(
            "dimensions must be between 1 and {MAX_DIM}"
        )));
    }
    let curves = schemes
        .iter()
        .map(|&s| {
            if digits == 0 {
                curve(&hilbert::<f64>(m, n, Precision::Double), s, eps)
            } else {
                curve(&hilbert::<Ext>(m, n, Precision::extended(digits)), s, eps)
            }
        })
        .collect::<Result<_>>()?;
    Ok(HilbertCurves {
        m,
        n,
        digits,
        curves,
    })
}

#[derive(Debug, Serialize)]
pub struct ScalarMap {
    pub scheme: SchemeId,
    pub order: u32,
    pub digits: u32,
    /// `log10|r_k|` with `r_k = 1 − x_k`, measured.
    pub measured: Vec<f64>,
    /// `p^k · log10|r_0|`.
    pub predicted: Vec<f64>,
}

/// Runs `scheme` on the 1×1 matrix `[1]` from `x₀ = 1 − r₀`, so that the
/// residual follows `r ↦ r^p` until it falls below the working precision.
pub fn scalar_map(scheme: SchemeId, r0: f64, loops: usize, digits: u32) -> Result<ScalarMap> {
    if r0.is_nan() || r0.abs() >= 1.0 || r0 == 0.0 {
        return Err(hyperinv::error::Error::InvalidInput(
            "r0 must satisfy 0 < |r0| < 1".into(),
        ));
    }
    let prec = Precision::extended(digits);
    let one = Ext::from_i64(1, prec);
    let a = DenseMatrix::from_fn(1, 1, prec, |_, _| one.clone());
    let mut x = DenseMatrix::from_fn(1, 1, prec, |_, _| one.clone() - Ext::from_f64(r0, prec));
    let p = scheme.order();
    let start = log10(&(one.clone() - x[(0, 0)].clone()));
    let mut measured = vec![start];
    let mut predicted = vec![start];
    for k in 1..=loops {
        x = scheme_step(scheme, &a, &x)?.0;
        let r = one.clone() - x[(0, 0)].clone();
        measured.push(log10(&r));
        predicted.push(start * (p as f64).powi(k as i32));
        if r.is_zero() {
            break;
        }
    }
    Ok(ScalarMap {
        scheme,
        order: p,
        digits,
        measured,
        predicted,
    })
}

fn to_json<S: Serialize>(r: Result<S>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

fn parse_schemes(list: &str) -> std::result::Result<Vec<SchemeId>, JsError> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<SchemeId>()
                .map_err(|e| JsError::new(&e.to_string()))
        })
        .collect()
}

#[wasm_bindgen(js_name = hilbertCurves)]
pub fn hilbert_curves_js(
    m: usize,
    n: usize,
    digits: u32,
    eps: f64,
    schemes: &str,
) -> std::result::Result<String, JsError> {
    to_json(hilbert_curves(m, n, digits, eps, &parse_schemes(schemes)?))
}

#[wasm_bindgen(js_name = scalarMap)]
pub fn scalar_map_js(
    scheme: &str,
    r0: f64,
    loops: usize,
    digits: u32,
) -> std::result::Result<String, JsError> {
    let [scheme] = parse_schemes(scheme)?[..] else {
        return Err(JsError::new("expected one scheme"));
    };
    to_json(scalar_map(scheme, r0, loops, digits))
}

/// PM and PM_STABLE continued from the best PM iterate on a singular 4×4
/// matrix. No seed keeps the matrix diagonal.
pub fn stability(seed: Option<u32>) -> Result<StabilityRun> {
    stability_run(seed.map(u64::from), CONTINUATION_LOOPS)
}

#[wasm_bindgen(js_name = stabilityTrace)]
pub fn stability_js(seed: Option<u32>) -> std::result::Result<String, JsError> {
    to_json(stability(seed))
}
