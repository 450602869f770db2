//! The nine acceptance checks, each returning a verdict with a one-line
//! explanation and its runtime.

use std::fmt;
use std::time::{Duration, Instant};

use hyperinv::decomp::{inverse, singular_values};
use hyperinv::driver::{efficiency_index, Termination};
use hyperinv::generators::{
    gaussian_matrix, geometric_spectrum, seeded_rng, shifted_laplacian, with_singular_values,
    LAPLACIAN_GRID, LAPLACIAN_SHIFT,
};
use hyperinv::gmres::DEFAULT_RESTART;
use hyperinv::matrix::{DenseMatrix, NormKind};
use hyperinv::precond::DEFAULT_DROP;
use hyperinv::scalar::{Ext, Precision, Scalar};
use hyperinv::scheme::{scheme_step, SchemeId, SchemeStep};
use hyperinv::stability::{stability_run, CONTINUATION_LOOPS};
use num_complex::Complex64;
use rand::Rng;

use crate::drazin::{drazin_table, DEFAULT_EPS, MIN_DIGITS, TABLE_SCHEMES};
use crate::error::Result;
use crate::hilbert::{penrose_suite, SUITE_RANDOM};
use crate::precond::{precond_bench, DEFAULT_TOLS};
use crate::verify::verify_coeffs;

#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} ({}): {} in {:.2} s (budget {} s) | {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

/// Runs `check` and folds its runtime into the verdict.
fn timed(
    id: u8,
    name: &'static str,
    budget_secs: u64,
    check: impl FnOnce() -> Result<(bool, String)>,
) -> Verdict {
    let t = Instant::now();
    let (ok, detail) = match check() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = t.elapsed();
    let budget = Duration::from_secs(budget_secs);
    Verdict {
        id,
        name,
        passed: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

fn decades_apart(x: f64, y: f64) -> f64 {
    (x.log10() - y.log10()).abs()
}

pub fn coefficients() -> Verdict {
    timed(1, "coefficients and factorization", 1, || {
        let r = verify_coeffs(None)?;
        let detail = r
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{}: systems ≤ {:.1e}, polynomial {:.1e}",
                    c.digits.map_or("double".into(), |d| format!("{d} digits")),
                    c.system_residuals.iter().copied().fold(0.0, f64::max),
                    c.polynomial_error
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        Ok((r.passed, detail))
    })
}

/// Iteration counts, convergence order and final step norm per scheme.
pub const TABLE_EXPECTED: [(SchemeId, usize, f64, f64); 4] = [
    (SchemeId::Sm, 17, 2.0, 3.712e-66),
    (SchemeId::Cm, 11, 3.0, 1.833e-59),
    (SchemeId::Fm, 7, 7.0, 6.3e-120),
    (SchemeId::Pm, 5, 18.0, 7.474e-107),
];

pub fn drazin_table_reproduction() -> Verdict {
    timed(2, "Drazin table", 60, || {
        let t = drazin_table(MIN_DIGITS, DEFAULT_EPS, NormKind::Infinity, &TABLE_SCHEMES)?;
        let mut ok = t.index.index == 3;
        let mut parts = vec![format!("index {}", t.index.index)];
        for (id, loops, rho, last) in TABLE_EXPECTED {
            let Some(row) = t.rows.iter().find(|r| r.scheme == id) else {
                ok = false;
                parts.push(format!("{id} missing"));
                continue;
            };
            let coc = row.coc.unwrap_or(f64::NAN);
            let step = row.final_step_norm.unwrap_or(f64::NAN);
            let good = row.terminated == Termination::Converged
                && row.loops == loops
                && (coc - rho).abs() <= 0.5
                && decades_apart(step, last) <= 1.0;
            ok &= good;
            parts.push(format!(
                "{id} IT {} ρ {coc:.3} last {}",
                row.loops, row.final_step_text
            ));
        }
        Ok((ok, parts.join(", ")))
    })
}

/// `X₀ = A⁻¹(I − F)` so that `I − AX₀ = F` with `‖F‖₂ = c`.
fn start_with_residual(
    a: &DenseMatrix<f64>,
    c: f64,
    rng: &mut impl Rng,
) -> Result<DenseMatrix<f64>> {
    let n = a.rows();
    let f = gaussian_matrix(n, n, rng);
    let f = f.scale(&(c / singular_values(&f)?[0]));
    let ainv = inverse(a)?;
    Ok(ainv.matmul(&DenseMatrix::identity(n, Precision::Double).sub(&f)?)?)
}

pub fn step_equivalence() -> Verdict {
    timed(3, "PM/HM step equivalence", 10, || {
        let mut rng = seeded_rng(3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.random_range(1..=8);
            let kappa = rng.random_range(1.0..100.0);
            let a = with_singular_values(n, n, &geometric_spectrum(n, kappa), &mut rng)?;
            let x0 = start_with_residual(&a, rng.random_range(0.05..0.9), &mut rng)?;
            let (reference, _) = scheme_step(SchemeId::Hyperpower(18), &a, &x0)?;
            for id in [SchemeId::Pm, SchemeId::Hm] {
                let (x1, _) = scheme_step(id, &a, &x0)?;
                let rel = x1.sub(&reference)?.norm_fro() / reference.norm_fro();
                worst = worst.max(rel);
            }
        }
        Ok((
            worst <= 1e-10,
            format!("worst relative difference {worst:.2e} over 100 instances"),
        ))
    })
}

/// Digits for the error-recursion check; `‖F₀¹⁸‖` drops below 1e-28 on these
/// instances, below double-precision roundoff.
pub const RECURSION_DIGITS: u32 = 50;

pub fn error_recursion() -> Verdict {
    timed(4, "error recursion", 30, || {
        let prec = Precision::extended(RECURSION_DIGITS);
        let mut rng = seeded_rng(4);
        let mut worst: f64 = 0.0;
        let mut smallest = f64::INFINITY;
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let a = gaussian_matrix(n, n, &mut rng);
            let f = gaussian_matrix(n, n, &mut rng);
            let c = rng.random_range(0.05..0.5);
            let f = f.scale(&(c / singular_values(&f)?[0]));
            let a = a.convert::<Ext>(prec);
            let f = f.convert::<Ext>(prec);
            let ainv = inverse(&a)?;
            let x0 = ainv.matmul(&DenseMatrix::identity(n, prec).sub(&f)?)?;
            let mut step = SchemeStep::<Ext>::new(SchemeId::Pm, prec)?;
            let x1 = step.step(&a, &x0)?;
            let err = a.matmul(&ainv)?.sub(&a.matmul(&x1)?)?;
            let f18 = f.mat_pow(18)?;
            let denom = f18.norm_fro();
            let rel = (err.sub(&f18)?.norm_fro() / denom.clone()).to_f64();
            let norm_gap = ((err.norm_fro() - denom.clone()).abs() / denom.clone()).to_f64();
            worst = worst.max(rel).max(norm_gap);
            smallest = smallest.min(denom.to_f64());
        }
        Ok((
            worst <= 1e-8,
            format!("worst relative error {worst:.2e} over 50 instances at {RECURSION_DIGITS} digits (smallest ‖F₀¹⁸‖ {smallest:.1e})"),
        ))
    })
}

pub fn moore_penrose_suite() -> Verdict {
    timed(5, "Moore–Penrose suite", 60, || {
        let cases = penrose_suite(5)?;
        let tol = 1e-8;
        let failed: Vec<_> = cases.iter().filter(|c| !c.passed(tol)).collect();
        let worst_rel = cases.iter().map(|c| c.run.relative).fold(0.0, f64::max);
        let slack = cases
            .iter()
            .map(|c| c.loop_bound - c.run.loops as f64)
            .fold(f64::INFINITY, f64::min);
        let hilbert: Vec<String> = cases
            .iter()
            .take(2)
            .map(|c| {
                format!(
                    "{} loops {} (bound {:.1}) rel {:.1e}",
                    c.label, c.run.loops, c.loop_bound, c.run.relative
                )
            })
            .collect();
        let mut detail = format!(
            "{}; {SUITE_RANDOM} random: worst rel {worst_rel:.1e}, least loop slack {slack:.2}",
            hilbert.join("; ")
        );
        for c in &failed {
            detail += &format!(
                "; FAILED {} loops {} rel {:.1e}",
                c.label, c.run.loops, c.run.relative
            );
        }
        Ok((failed.is_empty() && cases.len() == SUITE_RANDOM + 2, detail))
    })
}

pub const STABILITY_SEEDS: [u64; 3] = [2024, 1, 7];

pub fn stability_contrast() -> Verdict {
    timed(6, "PM vs PM_STABLE stability", 5, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for seed in STABILITY_SEEDS {
            let run = stability_run(Some(seed), CONTINUATION_LOOPS)?;
            let grows = run.pm.exceeds(10.0);
            let bounded = !run.pm_stable.blew_up
                && run.pm_stable.errors.len() == CONTINUATION_LOOPS
                && run.pm_stable.spread() <= 10.0;
            ok &= grows && bounded;
            parts.push(format!(
                "seed {seed}: handover at loop {}, PM spread {:.1e}, PM_STABLE spread {:.2}",
                run.handover_loop,
                run.pm.spread(),
                run.pm_stable.spread()
            ));
        }
        let diag = stability_run(None, CONTINUATION_LOOPS)?;
        parts.push(format!(
            "unrotated diagonal (informational): PM min error {:.1e}, PM_STABLE min error {:.1e}",
            diag.pm.min(),
            diag.pm_stable.min()
        ));
        Ok((ok, parts.join("; ")))
    })
}

/// Efficiency indices by (order, products) and their expected values to five decimals.
#[allow(clippy::approx_constant)]
pub const EI_EXPECTED: [(u32, u32, f64); 6] = [
    (2, 2, 1.41421),
    (3, 3, 1.44225),
    (7, 5, 1.47577),
    (18, 9, 1.37872),
    (18, 18, 1.17419),
    (18, 7, 1.51121),
];

pub fn efficiency_indices() -> Verdict {
    timed(7, "efficiency indices", 1, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (p, c, want) in EI_EXPECTED {
            let got = efficiency_index(p, c);
            let rounded = (got * 1e5).round() / 1e5;
            ok &= (rounded - want).abs() < 1e-9;
            parts.push(format!("{p}^(1/{c}) = {got:.5}"));
        }
        ok &= (SchemeId::Pm.efficiency_index() - efficiency_index(18, 7)).abs() == 0.0;
        Ok((ok, parts.join(", ")))
    })
}

pub fn preconditioning_ordering() -> Verdict {
    timed(8, "preconditioner ordering", 120, || {
        let a = shifted_laplacian(LAPLACIAN_GRID, LAPLACIAN_SHIFT);
        let b = vec![Complex64::new(1.0, 0.0); a.rows()];
        let bench = precond_bench(&a, &b, &DEFAULT_TOLS, DEFAULT_RESTART, DEFAULT_DROP)?;
        let pm = "PM-X1";
        let mut ok = true;
        let mut cells = Vec::new();
        for tol in DEFAULT_TOLS {
            let none = bench.iterations("none", tol);
            let jac = bench.iterations("jacobi", tol);
            let p = bench.iterations(pm, tol);
            let better_than_none = matches!((p, none), (Some(p), Some(n)) if p < n);
            let vs_jacobi = tol > 1e-6 || matches!((p, jac), (Some(p), Some(j)) if p <= j);
            ok &= better_than_none && vs_jacobi;
            let show = |v: Option<usize>| v.map_or("-".into(), |v| v.to_string());
            cells.push(format!(
                "{tol:.0e}: {}/{}/{}",
                show(p),
                show(none),
                show(jac)
            ));
        }
        Ok((
            ok,
            format!("PM-X1/none/Jacobi iterations {}", cells.join(" ")),
        ))
    })
}

pub fn multiplication_accounting() -> Verdict {
    timed(9, "multiplication accounting", 1, || {
        let prec = Precision::Double;
        let a = DenseMatrix::diag(&[2.0, 1.0, 0.5], prec);
        let x0 = a.scale(&0.2);
        let measure = |id: SchemeId| -> Result<usize> {
            let mut s = SchemeStep::<f64>::new(id, prec)?;
            let x1 = s.step(&a, &x0)?;
            s.step(&a, &x1)?;
            Ok(s.last_matmuls())
        };
        let mut ok = true;
        let mut parts = Vec::new();
        for (id, want) in [
            (SchemeId::Sm, 2),
            (SchemeId::Cm, 3),
            (SchemeId::Fm, 5),
            (SchemeId::Hm, 9),
            (SchemeId::Pm, 7),
        ] {
            let got = measure(id)?;
            ok &= got == want;
            parts.push(format!("{id} {got}"));
        }
        for p in 2..=20 {
            let got = measure(SchemeId::Hyperpower(p))?;
            ok &= got == p as usize;
        }
        parts.push("HYPERPOWER(p) p for p = 2..20".into());
        let stable = measure(SchemeId::PmStable)?;
        ok &= stable == SchemeId::PmStable.matmuls_per_loop() as usize;
        parts.push(format!(
            "PM_STABLE measured {stable} (nominal {})",
            SchemeId::PmStable.nominal_matmuls()
        ));
        Ok((ok, parts.join(", ")))
    })
}

/// All nine checks in order.
pub fn run_all() -> Vec<Verdict> {
    vec![
        coefficients(),
        drazin_table_reproduction(),
        step_equivalence(),
        error_recursion(),
        moore_penrose_suite(),
        stability_contrast(),
        efficiency_indices(),
        preconditioning_ordering(),
        multiplication_accounting(),
    ]
}
