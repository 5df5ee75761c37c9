//! Truncation control shared by every infinite series in the crate.

use crate::error::{Error, Result};

/// Caps and tolerances for series evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesControl {
    /// Cap on the outer mixture index `m`.
    pub max_terms: usize,
    /// Absolute tail tolerance.
    pub abs_tol: f64,
    /// Relative tail tolerance (against the accumulated partial sum).
    pub rel_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { max_terms: 500, abs_tol: 1e-10, rel_tol: 1e-8 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 1 {
            return Err(Error::domain("max_terms must be >= 1"));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::domain("series tolerances must be positive"));
        }
        Ok(())
    }
}
