//! Iteration driver, stopping rules and convergence diagnostics.

use std::fmt;

use log::warn;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, NormKind};
use crate::scalar::{Real, Scalar};
use crate::scheme::{SchemeId, SchemeStep};

pub const DEFAULT_MAX_LOOPS: usize = 100;
pub const DIVERGENCE_FACTOR: f64 = 1e3;
pub const DIVERGENCE_WINDOW: usize = 3;

/// When to stop iterating. All norms are of kind [`StopRule::norm`].
#[derive(Clone, Debug, PartialEq)]
pub enum StopCriterion<R> {
    /// `‖X_{k+1} − X_k‖ / (p^k α) < ε`, with `k` the zero-based loop index.
    Reliable { order: u32, alpha: R, eps: R },
    /// `‖I − A X_{k+1}‖ < ε`. Costs one product per loop on top of the scheme.
    Residual { eps: R },
    /// `‖X_{k+1} − X_k‖ < ε`.
    Step { eps: R },
    /// `‖X_{k+1} − X_k‖ < ε ‖X_{k+1}‖`.
    RelativeStep { eps: R },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StopRule<R> {
    pub criterion: StopCriterion<R>,
    pub norm: NormKind,
    pub max_loops: usize,
    /// Record `‖I − A X_{k+1}‖` every loop (one extra product, not counted
    /// against the scheme).
    pub log_residual: bool,
}

impl<R: Real> StopRule<R> {
    fn with(criterion: StopCriterion<R>, norm: NormKind) -> Self {
        Self {
            criterion,
            norm,
            max_loops: DEFAULT_MAX_LOOPS,
            log_residual: false,
        }
    }

    pub fn step(eps: R, norm: NormKind) -> Self {
        Self::with(StopCriterion::Step { eps }, norm)
    }

    pub fn relative_step(eps: R, norm: NormKind) -> Self {
        Self::with(StopCriterion::RelativeStep { eps }, norm)
    }

    pub fn residual(eps: R, norm: NormKind) -> Self {
        Self::with(StopCriterion::Residual { eps }, norm)
    }

    pub fn reliable(order: u32, alpha: R, eps: R, norm: NormKind) -> Self {
        Self::with(StopCriterion::Reliable { order, alpha, eps }, norm)
    }

    pub fn with_max_loops(mut self, max_loops: usize) -> Self {
        self.max_loops = max_loops;
        self
    }

    pub fn with_residual_log(mut self, on: bool) -> Self {
        self.log_residual = on;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    LoopBudget,
    DivergenceDetected,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::LoopBudget => "loop budget",
            Termination::DivergenceDetected => "diverging",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopRecord<R> {
    /// `‖X_{k+1} − X_k‖`.
    pub step_norm: R,
    /// `‖I − A X_{k+1}‖`, when residual logging is on.
    pub residual_norm: Option<R>,
    pub matmul_count: usize,
}

#[derive(Clone, Debug)]
pub struct IterationReport<T: Scalar> {
    pub scheme: SchemeId,
    pub loops: usize,
    pub terminated: Termination,
    pub history: Vec<LoopRecord<T::Real>>,
    pub x: DenseMatrix<T>,
    pub coc: Option<T::Real>,
    /// Set when the reliable rule's denominator left the exponent range and
    /// the plain step rule was used instead.
    pub reliable_degraded: bool,
}

impl<T: Scalar> IterationReport<T> {
    pub fn converged(&self) -> bool {
        self.terminated == Termination::Converged
    }

    pub fn step_norms(&self) -> Vec<T::Real> {
        self.history.iter().map(|r| r.step_norm.clone()).collect()
    }

    pub fn total_matmuls(&self) -> usize {
        self.history.iter().map(|r| r.matmul_count).sum()
    }

    /// Products per loop if constant across the run.
    pub fn matmuls_per_loop(&self) -> Option<usize> {
        let first = self.history.first()?.matmul_count;
        self.history
            .iter()
            .all(|r| r.matmul_count == first)
            .then_some(first)
    }

    pub fn final_step_norm(&self) -> Option<&T::Real> {
        self.history.last().map(|r| &r.step_norm)
    }

    /// Serializable view without the iterate.
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            scheme: self.scheme,
            loops: self.loops,
            terminated: self.terminated,
            history: self
                .history
                .iter()
                .enumerate()
                .map(|(k, r)| RecordSummary {
                    k: k + 1,
                    step_norm: r.step_norm.to_f64(),
                    residual_norm: r.residual_norm.as_ref().map(Real::to_f64),
                    matmul_count: r.matmul_count,
                })
                .collect(),
            coc: self.coc.as_ref().map(Real::to_f64),
            matmuls_per_loop: self.matmuls_per_loop(),
            total_matmuls: self.total_matmuls(),
            reliable_degraded: self.reliable_degraded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    #[serde(rename = "loop")]
    pub k: usize,
    pub step_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual_norm: Option<f64>,
    pub matmul_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub scheme: SchemeId,
    pub loops: usize,
    pub terminated: Termination,
    pub history: Vec<RecordSummary>,
    pub coc: Option<f64>,
    pub matmuls_per_loop: Option<usize>,
    pub total_matmuls: usize,
    pub reliable_degraded: bool,
}

/// An error raised mid-run, with everything recorded up to that point.
#[derive(Debug, thiserror::Error)]
#[error("{error} (after {} loops)", report.loops)]
pub struct IterationFailure<T: Scalar> {
    pub error: Error,
    pub report: Box<IterationReport<T>>,
}

/// `I − A X`, in one product.
pub fn residual<T: Scalar>(a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    a.matmul(x)?.identity_minus(&T::one())
}

/// Runs `id` from `x0` until `stop` fires.
pub fn iterate<T: Scalar>(
    id: SchemeId,
    a: &DenseMatrix<T>,
    x0: &DenseMatrix<T>,
    stop: &StopRule<T::Real>,
) -> Result<IterationReport<T>, IterationFailure<T>> {
    iterate_with(id, a, x0, stop, |_, _| {})
}

/// Like [`iterate`], calling `observe(k, X_k)` after each loop `k ≥ 1`.
pub fn iterate_with<T: Scalar>(
    id: SchemeId,
    a: &DenseMatrix<T>,
    x0: &DenseMatrix<T>,
    stop: &StopRule<T::Real>,
    mut observe: impl FnMut(usize, &DenseMatrix<T>),
) -> Result<IterationReport<T>, IterationFailure<T>> {
    let prec = x0.precision();
    let mut report = IterationReport {
        scheme: id,
        loops: 0,
        terminated: Termination::LoopBudget,
        history: Vec::new(),
        x: x0.clone(),
        coc: None,
        reliable_degraded: false,
    };
    let fail = |error: Error, mut report: IterationReport<T>| {
        report.coc = coc_estimate(&report.step_norms()).ok();
        IterationFailure {
            error,
            report: Box::new(report),
        }
    };
    let mut stepper = match SchemeStep::new(id, prec) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, report)),
    };
    let factor = T::Real::from_f64(DIVERGENCE_FACTOR, prec);
    // Ill-conditioned starts grow the step norm, not always monotonically,
    // for many loops before the iteration contracts. The divergence check is
    // armed once a step has fallen `factor` below the largest step so far.
    let mut running_min: Option<T::Real> = None;
    let mut running_max: Option<T::Real> = None;
    let mut growth_streak = 0;
    // p^k α for the reliable rule, updated as k advances.
    let mut reliable_scale = match &stop.criterion {
        StopCriterion::Reliable { alpha, .. } => Some(alpha.clone()),
        _ => None,
    };

    for k in 0..stop.max_loops {
        let next = match stepper.step(a, &report.x) {
            Ok(x) => x,
            Err(e) => return Err(fail(e, report)),
        };
        let measured = (|| -> Result<(T::Real, Option<T::Real>)> {
            let step = next.sub(&report.x)?.norm(stop.norm)?;
            let needs_residual =
                stop.log_residual || matches!(stop.criterion, StopCriterion::Residual { .. });
            let res = if needs_residual {
                Some(residual(a, &next)?.norm(stop.norm)?)
            } else {
                None
            };
            Ok((step, res))
        })();
        let (step, res) = match measured {
            Ok(v) => v,
            Err(e) => return Err(fail(e, report)),
        };
        report.history.push(LoopRecord {
            step_norm: step.clone(),
            residual_norm: res.clone(),
            matmul_count: stepper.last_matmuls(),
        });
        report.loops = k + 1;
        report.x = next;
        observe(k + 1, &report.x);

        let done = match &stop.criterion {
            StopCriterion::Step { eps } => step < *eps,
            StopCriterion::RelativeStep { eps } => match report.x.norm(stop.norm) {
                Ok(xn) => step < eps.clone() * xn,
                Err(e) => return Err(fail(e, report)),
            },
            StopCriterion::Residual { eps } => res.as_ref().is_some_and(|r| r < eps),
            StopCriterion::Reliable { order, eps, .. } => {
                let scale = reliable_scale
                    .clone()
                    .filter(|s| s.is_finite() && !s.is_zero());
                match scale {
                    Some(s) => {
                        reliable_scale =
                            Some(s.clone() * T::Real::from_ratio(*order as i64, 1, prec));
                        step.clone() / s < *eps
                    }
                    None => {
                        if !report.reliable_degraded {
                            warn!("reliable stopping scale p^k·α left the exponent range at loop {}; using the step rule", k + 1);
                            report.reliable_degraded = true;
                        }
                        step < *eps
                    }
                }
            }
        };
        if done {
            report.terminated = Termination::Converged;
            break;
        }

        match &running_min {
            Some(m) if !m.is_zero() && step >= factor.clone() * m.clone() => {
                growth_streak += 1;
                if growth_streak >= DIVERGENCE_WINDOW {
                    report.terminated = Termination::DivergenceDetected;
                    break;
                }
            }
            _ => growth_streak = 0,
        }
        let contracting = running_min.is_some()
            || matches!(&running_max, Some(peak) if step.clone() * factor.clone() <= *peak);
        if contracting {
            running_min = Some(match running_min {
                Some(m) => m.min_of(step.clone()),
                None => step.clone(),
            });
        }
        running_max = Some(match running_max {
            Some(m) => m.max_of(step),
            None => step,
        });
    }
    report.coc = coc_estimate(&report.step_norms()).ok();
    Ok(report)
}

/// Computational order of convergence from the last three consecutive step
/// norms that are positive and strictly decreasing:
/// `ρ = ln(s₃/s₂) / ln(s₂/s₁)`.
pub fn coc_estimate<R: Real>(step_norms: &[R]) -> Result<R> {
    step_norms
        .windows(3)
        .rev()
        .find(|w| w.iter().all(|s| *s > R::zero() && s.is_finite()) && w[2] < w[1] && w[1] < w[0])
        .map(|w| (w[2].clone() / w[1].clone()).ln() / (w[1].clone() / w[0].clone()).ln())
        .ok_or(Error::InsufficientHistory)
}

/// `p^(1/c)`: order gained per matrix product.
pub fn efficiency_index(p: u32, c: u32) -> f64 {
    (p as f64).powf(1.0 / c as f64)
}

/// Loops an order-`p` scheme needs to bring the residual from about 1 to
/// machine precision when the condition number is `kappa`: `2 ln κ / ln p`.
pub fn predicted_loops(kappa: f64, p: u32) -> Result<f64> {
    if kappa.is_nan() || kappa < 1.0 || p < 2 {
        return Err(Error::InvalidInput(format!(
            "predicted_loops needs kappa >= 1 and p >= 2 (got {kappa}, {p})"
        )));
    }
    Ok(2.0 * kappa.ln() / (p as f64).ln())
}
