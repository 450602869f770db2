//! Restarted GMRES with optional left preconditioning.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::sparse::CsrMatrix;

pub const DEFAULT_RESTART: usize = 50;
/// A restart cycle that improves the true relative residual by less than
/// this fraction counts as stagnation.
pub const STAGNATION: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct GmresConfig<'a, T> {
    pub restart: usize,
    /// Target for the relative residual `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Budget of inner (Arnoldi) iterations over all cycles.
    pub max_iters: usize,
    /// Left preconditioner `M`; the solver works on `MAx = Mb`.
    pub preconditioner: Option<&'a CsrMatrix<T>>,
}

impl<T> Default for GmresConfig<'_, T> {
    fn default() -> Self {
        Self {
            restart: DEFAULT_RESTART,
            tol: 1e-8,
            max_iters: 1000,
            preconditioner: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartCheck {
    /// Inner iterations completed when the check ran.
    pub iteration: usize,
    pub true_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GmresReport<T> {
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual of the preconditioned system after each inner
    /// iteration, `‖M(b − Ax)‖ / ‖Mb‖`.
    pub residual_history: Vec<f64>,
    /// Index into `residual_history` at which each cycle begins.
    pub cycle_starts: Vec<usize>,
    /// True relative residual at the end of every cycle.
    pub restarts: Vec<RestartCheck>,
    pub stagnated: bool,
    #[serde(skip)]
    pub x: Vec<T>,
}

impl<T> GmresReport<T> {
    pub fn final_true_residual(&self) -> Option<f64> {
        self.restarts.last().map(|r| r.true_residual)
    }
}

fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter()
        .zip(v)
        .fold(T::zero(), |acc, (a, b)| acc + a.conj() * b.clone())
}

fn norm<T: Scalar>(v: &[T]) -> T::Real {
    v.iter()
        .fold(T::Real::zero(), |acc, x| acc + x.abs_sqr())
        .sqrt()
}

/// Solves `Ax = b` from a zero initial guess.
///
/// Each cycle runs Arnoldi with modified Gram–Schmidt and solves the small
/// least-squares problem with Givens rotations. An exactly invariant Krylov
/// space ends the cycle early. Convergence is decided on the true residual.
pub fn gmres<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    cfg: &GmresConfig<'_, T>,
) -> Result<GmresReport<T>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Shape {
            op: "gmres",
            left: a.shape(),
            right: (b.len(), 1),
        });
    }
    if let Some(m) = cfg.preconditioner {
        if m.shape() != (n, n) {
            return Err(Error::Shape {
                op: "gmres preconditioner",
                left: a.shape(),
                right: m.shape(),
            });
        }
    }
    if cfg.restart == 0 || cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidInput(
            "gmres needs restart ≥ 1 and tol > 0".into(),
        ));
    }
    let precondition = |v: Vec<T>| -> Result<Vec<T>> {
        match cfg.preconditioner {
            Some(m) => m.spmv(&v),
            None => Ok(v),
        }
    };
    let op = |v: &[T]| -> Result<Vec<T>> { precondition(a.spmv(v)?) };
    let true_residual = |x: &[T]| -> Result<Vec<T>> {
        let ax = a.spmv(x)?;
        Ok(b.iter().zip(ax).map(|(bi, y)| bi.clone() - y).collect())
    };

    let mut report = GmresReport {
        iterations: 0,
        converged: false,
        residual_history: Vec::new(),
        cycle_starts: Vec::new(),
        restarts: Vec::new(),
        stagnated: false,
        x: vec![T::zero(); n],
    };
    let b_norm = norm(b).to_f64();
    if b_norm == 0.0 {
        report.converged = true;
        report.restarts.push(RestartCheck {
            iteration: 0,
            true_residual: 0.0,
        });
        return Ok(report);
    }
    let mb_norm = norm(&precondition(b.to_vec())?).to_f64();
    if mb_norm == 0.0 {
        return Err(Error::Degenerate(
            "preconditioner annihilates the right-hand side".into(),
        ));
    }
    // The inner target tightens when the preconditioned residual is an
    // optimistic proxy for the true one.
    let mut inner_tol = cfg.tol;
    let mut last_true = 1.0;

    while report.iterations < cfg.max_iters {
        let r = precondition(true_residual(&report.x)?)?;
        let beta = norm(&r);
        if beta.to_f64() == 0.0 {
            report.converged = true;
            break;
        }
        report.cycle_starts.push(report.residual_history.len());
        let m = cfg.restart.min(cfg.max_iters - report.iterations);
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(
            r.into_iter()
                .map(|x| x / T::from_real(beta.clone()))
                .collect(),
        );
        // Hessenberg columns after rotation, stored as upper-triangular R.
        let mut hcols: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut rot: Vec<(T::Real, T)> = Vec::with_capacity(m);
        let mut g: Vec<T> = vec![T::from_real(beta.clone())];
        let mut k = 0;
        while k < m {
            let mut w = op(&basis[k])?;
            let w_norm0 = norm(&w);
            let mut h: Vec<T> = Vec::with_capacity(k + 2);
            for v in &basis {
                let hij = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi = wi.clone() - hij.clone() * vi.clone();
                }
                h.push(hij);
            }
            let h_next = norm(&w);
            h.push(T::from_real(h_next.clone()));
            for (i, (c, s)) in rot.iter().enumerate() {
                let (x, y) = (h[i].clone(), h[i + 1].clone());
                h[i] = x.scale(c) + s.clone() * y.clone();
                h[i + 1] = -(s.conj() * x) + y.scale(c);
            }
            let (c, s) = givens(&h[k], &h[k + 1]);
            let (x, y) = (h[k].clone(), h[k + 1].clone());
            h[k] = x.scale(&c) + s.clone() * y;
            h[k + 1] = T::zero();
            let gk = g[k].clone();
            g.push(-(s.conj() * gk.clone()));
            g[k] = gk.scale(&c);
            rot.push((c, s));
            h.truncate(k + 1);
            hcols.push(h);
            k += 1;
            report.iterations += 1;
            let rel = g[k].abs().to_f64() / mb_norm;
            report.residual_history.push(rel);

            let breakdown = h_next.to_f64() <= f64::EPSILON * w_norm0.to_f64();
            if rel <= inner_tol || breakdown {
                break;
            }
            basis.push(
                w.into_iter()
                    .map(|x| x / T::from_real(h_next.clone()))
                    .collect(),
            );
        }
        // Back substitution for y in R y = g[..k].
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i].clone();
            for j in i + 1..k {
                acc = acc - hcols[j][i].clone() * y[j].clone();
            }
            y[i] = if hcols[i][i].is_zero() {
                T::zero()
            } else {
                acc / hcols[i][i].clone()
            };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in report.x.iter_mut().zip(&basis[j]) {
                *xi = xi.clone() + yj.clone() * vi.clone();
            }
        }
        let true_rel = norm(&true_residual(&report.x)?).to_f64() / b_norm;
        report.restarts.push(RestartCheck {
            iteration: report.iterations,
            true_residual: true_rel,
        });
        if true_rel <= cfg.tol {
            report.converged = true;
            break;
        }
        let precond_rel = report.residual_history.last().copied().unwrap_or(1.0);
        if precond_rel <= inner_tol && true_rel > 0.0 {
            inner_tol = (inner_tol * cfg.tol / true_rel).min(inner_tol * 0.5);
        }
        if true_rel > last_true * (1.0 - STAGNATION) {
            report.stagnated = true;
            break;
        }
        last_true = true_rel;
    }
    Ok(report)
}

/// Rotation `(c, s)` with real `c` such that `[c s; −s̄ c]·[a; b] = [r; 0]`.
fn givens<T: Scalar>(a: &T, b: &T) -> (T::Real, T) {
    let (abs_a, abs_b) = (a.abs(), b.abs());
    if abs_b.is_zero() {
        return (T::Real::one(), T::zero());
    }
    if abs_a.is_zero() {
        return (T::Real::zero(), b.conj() / T::from_real(abs_b));
    }
    let denom = (abs_a.clone() * abs_a.clone() + abs_b.clone() * abs_b).sqrt();
    let c = abs_a.clone() / denom.clone();
    let phase = a.clone() / T::from_real(abs_a);
    let s = phase * b.conj() / T::from_real(denom);
    (c, s)
}
