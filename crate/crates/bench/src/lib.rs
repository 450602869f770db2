//! Experiment harness for the `hyperinv` library: coefficient checks,
//! iteration tables, Moore–Penrose and preconditioning benchmarks.

pub mod acceptance;
pub mod config;
pub mod drazin;
pub mod error;
pub mod hilbert;
pub mod invert;
pub mod precond;
pub mod verify;

use serde::Serialize;

pub use error::{BenchError, Result};

/// Serializes rows as CSV with a header line.
pub(crate) fn to_csv<S: Serialize>(items: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for it in items {
        w.serialize(it)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Caps the global worker pool at `HYPERINV_THREADS` when it is set.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("HYPERINV_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        BenchError::Config(format!(
            "HYPERINV_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    // A pool may already exist when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(Some(n))
}
