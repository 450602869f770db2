//! Post-convergence behaviour of PM versus PM_STABLE on a rank-deficient
//! matrix with known pseudoinverse.

use serde::Serialize;

use crate::checks::outer_inverse_check;
use crate::error::{Error, Result};
use crate::generators::{random_orthogonal, seeded_rng};
use crate::matrix::{DenseMatrix, NormKind};
use crate::scalar::Precision;
use crate::scheme::{SchemeId, SchemeStep};

/// Singular values of the test matrix; the last one makes it singular.
pub const SPECTRUM: [f64; 4] = [1.0, 1e-1, 1e-2, 0.0];
/// PM loops searched for the best iterate.
pub const WARMUP_LOOPS: usize = 40;
/// Loops run by each scheme after the hand-over.
pub const CONTINUATION_LOOPS: usize = 25;

#[derive(Clone, Debug, Serialize)]
pub struct SchemeTrace {
    pub scheme: SchemeId,
    /// `‖X_j − A†‖_F` for `j = 1..`, starting after the hand-over iterate.
    /// A loop that produced non-finite values ends the trace.
    pub errors: Vec<f64>,
    pub blew_up: bool,
}

impl SchemeTrace {
    pub fn min(&self) -> f64 {
        self.errors.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest error relative to the smallest; infinite after a blow-up.
    pub fn spread(&self) -> f64 {
        if self.blew_up {
            return f64::INFINITY;
        }
        let max = self.errors.iter().copied().fold(0.0, f64::max);
        max / self.min()
    }

    /// Whether some error exceeds `factor` times the minimum so far.
    pub fn exceeds(&self, factor: f64) -> bool {
        if self.blew_up {
            return true;
        }
        let mut min = f64::INFINITY;
        for &e in &self.errors {
            min = min.min(e);
            if e > factor * min {
                return true;
            }
        }
        false
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRun {
    pub seed: Option<u64>,
    /// Loop of the warm-up PM run with the smallest `‖XAX − X‖_F`.
    pub handover_loop: usize,
    /// `‖X − A†‖_F` of the hand-over iterate.
    pub handover_error: f64,
    pub outer_residuals: Vec<f64>,
    pub pm: SchemeTrace,
    pub pm_stable: SchemeTrace,
}

/// Builds `A = U·diag(SPECTRUM)·Vᵀ` and its pseudoinverse. With no seed
/// `U = V = I`.
pub fn test_matrix(seed: Option<u64>) -> (DenseMatrix<f64>, DenseMatrix<f64>) {
    let d = Precision::Double;
    let (u, v) = match seed {
        Some(s) => {
            let mut rng = seeded_rng(s);
            let u = random_orthogonal(4, &mut rng);
            (u, random_orthogonal(4, &mut rng))
        }
        None => (DenseMatrix::identity(4, d), DenseMatrix::identity(4, d)),
    };
    let inv: Vec<f64> = SPECTRUM
        .iter()
        .map(|&s| if s == 0.0 { 0.0 } else { 1.0 / s })
        .collect();
    let a = u
        .matmul(&DenseMatrix::diag(&SPECTRUM, d))
        .and_then(|m| m.matmul(&v.transpose()))
        .expect("square factors");
    let pinv = v
        .matmul(&DenseMatrix::diag(&inv, d))
        .and_then(|m| m.matmul(&u.transpose()))
        .expect("square factors");
    (a, pinv)
}

fn trace(
    id: SchemeId,
    a: &DenseMatrix<f64>,
    pinv: &DenseMatrix<f64>,
    start: &DenseMatrix<f64>,
    loops: usize,
) -> Result<SchemeTrace> {
    let mut stepper = SchemeStep::new(id, Precision::Double)?;
    let mut x = start.clone();
    let mut errors = Vec::with_capacity(loops);
    let mut blew_up = false;
    for _ in 0..loops {
        match stepper.step(a, &x) {
            Ok(next) => x = next,
            Err(Error::NonFinite { .. }) => {
                blew_up = true;
                break;
            }
            Err(e) => return Err(e),
        }
        errors.push(x.sub(pinv)?.norm_fro());
    }
    Ok(SchemeTrace {
        scheme: id,
        errors,
        blew_up,
    })
}

/// Runs PM from `X₀ = Aᵀ/2`, picks the iterate closest to satisfying
/// `XAX = X`, and continues from it with PM and with PM_STABLE.
pub fn stability_run(seed: Option<u64>, loops: usize) -> Result<StabilityRun> {
    let (a, pinv) = test_matrix(seed);
    let mut pm = SchemeStep::new(SchemeId::Pm, Precision::Double)?;
    let mut x = a.transpose().scale(&0.5);
    let mut iterates = Vec::new();
    let mut outer_residuals = Vec::new();
    for _ in 0..WARMUP_LOOPS {
        x = match pm.step(&a, &x) {
            Ok(next) => next,
            Err(Error::NonFinite { .. }) => break,
            Err(e) => return Err(e),
        };
        outer_residuals.push(outer_inverse_check(&a, &x, NormKind::Frobenius)?.outer);
        iterates.push(x.clone());
    }
    let best = outer_residuals
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("no finite PM iterate".into()))?;
    let start = &iterates[best];
    Ok(StabilityRun {
        seed,
        handover_loop: best + 1,
        handover_error: start.sub(&pinv)?.norm_fro(),
        outer_residuals,
        pm: trace(SchemeId::Pm, &a, &pinv, start, loops)?,
        pm_stable: trace(SchemeId::PmStable, &a, &pinv, start, loops)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotated_instance_separates_schemes() {
        let run = stability_run(Some(2024), CONTINUATION_LOOPS).unwrap();
        assert!(run.pm.exceeds(10.0));
        assert!(run.pm_stable.spread() < 10.0, "{}", run.pm_stable.spread());
        assert_eq!(run.pm_stable.errors.len(), CONTINUATION_LOOPS);
    }

    #[test]
    fn diagonal_instance_is_exact() {
        let run = stability_run(None, 5).unwrap();
        assert_eq!(run.pm.min(), 0.0);
    }
}
