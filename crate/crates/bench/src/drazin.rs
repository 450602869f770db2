//! Drazin-inverse iteration counts on the 12×12 index-3 example.

use std::fmt::Write;
use std::time::Instant;

use hyperinv::driver::{iterate, StopRule, Termination};
use hyperinv::generators::drazin_example;
use hyperinv::init::{init_drazin, IndexResult};
use hyperinv::matrix::NormKind;
use hyperinv::scalar::{Ext, Precision, Real, Scalar};
use hyperinv::scheme::SchemeId;
use log::warn;
use serde::Serialize;

use crate::error::Result;
use crate::to_csv;

/// Smallest precision at which the table is meaningful.
pub const MIN_DIGITS: u32 = 150;
/// 150 digits plus guard digits.
pub const DEFAULT_DIGITS: u32 = 170;
pub const DEFAULT_EPS: f64 = 1e-50;
/// Step tolerance used when the run falls back to double precision.
pub const FALLBACK_EPS: f64 = 1e-12;
pub const TABLE_SCHEMES: [SchemeId; 4] = [SchemeId::Sm, SchemeId::Cm, SchemeId::Fm, SchemeId::Pm];

#[derive(Clone, Debug, Serialize)]
pub struct DrazinRow {
    pub scheme: SchemeId,
    pub loops: usize,
    pub terminated: Termination,
    pub final_step_norm: Option<f64>,
    /// Four significant digits, kept exact for values below the double range.
    pub final_step_text: String,
    pub coc: Option<f64>,
    #[serde(skip)]
    pub millis: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DrazinTable {
    /// `None` when the run fell back to double precision.
    pub digits: Option<u32>,
    pub eps: f64,
    pub norm: NormKind,
    pub index: IndexResult,
    pub rows: Vec<DrazinRow>,
    pub notes: Vec<String>,
}

fn run<T: Scalar>(
    prec: Precision,
    eps: f64,
    norm: NormKind,
    schemes: &[SchemeId],
) -> Result<(IndexResult, Vec<DrazinRow>)> {
    let a = drazin_example::<T>(prec);
    let init = init_drazin(&a)?;
    let index = init.index.clone().expect("Drazin start records the index");
    // Parse rather than convert so that 1e-50 is exact to working precision.
    let eps_r = T::Real::parse_decimal(&format!("{eps:e}"), prec)
        .unwrap_or_else(|| T::Real::from_f64(eps, prec));
    let stop = StopRule::step(eps_r, norm);
    let mut rows = Vec::with_capacity(schemes.len());
    for &id in schemes {
        let t = Instant::now();
        let (report, error) = match iterate(id, &a, &init.x0, &stop) {
            Ok(r) => (r, None),
            Err(f) => (*f.report, Some(f.error.to_string())),
        };
        let last = report.final_step_norm();
        rows.push(DrazinRow {
            scheme: id,
            loops: report.loops,
            terminated: report.terminated,
            final_step_norm: last.map(Real::to_f64),
            final_step_text: last.map(|v| v.to_decimal(Some(4))).unwrap_or_default(),
            coc: report.coc.as_ref().map(Real::to_f64),
            millis: t.elapsed().as_secs_f64() * 1e3,
            error,
        });
    }
    Ok((index, rows))
}

/// Runs each scheme from `X₀ = A^l / tr(A^{l+1})` with the absolute step
/// rule. Below [`MIN_DIGITS`] the run drops to double precision with
/// `ε = 1e-12` and leaves FM out.
pub fn drazin_table(
    digits: u32,
    eps: f64,
    norm: NormKind,
    schemes: &[SchemeId],
) -> Result<DrazinTable> {
    let mut notes = Vec::new();
    if digits >= MIN_DIGITS {
        let (index, rows) = run::<Ext>(Precision::extended(digits), eps, norm, schemes)?;
        return Ok(DrazinTable {
            digits: Some(digits),
            eps,
            norm,
            index,
            rows,
            notes,
        });
    }
    let msg = format!(
        "{digits} digits is below the {MIN_DIGITS} the table needs; running at double precision with eps {FALLBACK_EPS:e}"
    );
    warn!("{msg}");
    notes.push(msg);
    let kept: Vec<_> = schemes
        .iter()
        .copied()
        .filter(|s| *s != SchemeId::Fm)
        .collect();
    if kept.len() < schemes.len() {
        notes.push("FM omitted at double precision".into());
    }
    let (index, rows) = run::<f64>(Precision::Double, FALLBACK_EPS, norm, &kept)?;
    Ok(DrazinTable {
        digits: None,
        eps: FALLBACK_EPS,
        norm,
        index,
        rows,
        notes,
    })
}

impl DrazinTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let prec = match self.digits {
            Some(d) => format!("{d} digits"),
            None => "double".into(),
        };
        let _ = writeln!(
            out,
            "index {} (ranks {:?}), {prec}, eps {:e}, {} norm",
            self.index.index, self.index.rank_sequence, self.eps, self.norm
        );
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(
            out,
            "{:<10} {:>4} {:>12} {:>9} {:>10}  status",
            "scheme", "IT", "last step", "rho", "ms"
        );
        for r in &self.rows {
            let rho = r
                .coc
                .map(|c| format!("{c:.4}"))
                .unwrap_or_else(|| "-".into());
            let status = r.error.clone().unwrap_or_else(|| r.terminated.to_string());
            let _ = writeln!(
                out,
                "{:<10} {:>4} {:>12} {:>9} {:>10.1}  {status}",
                r.scheme.to_string(),
                r.loops,
                r.final_step_text,
                rho,
                r.millis
            );
        }
        out
    }

    /// Rows as CSV, without timings.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            scheme: String,
            loops: usize,
            terminated: Termination,
            final_step_norm: &'a str,
            coc: Option<f64>,
        }
        let lines: Vec<Line> = self
            .rows
            .iter()
            .map(|r| Line {
                scheme: r.scheme.to_string(),
                loops: r.loops,
                terminated: r.terminated,
                final_step_norm: &r.final_step_text,
                coc: r.coc,
            })
            .collect();
        to_csv(&lines)
    }
}
