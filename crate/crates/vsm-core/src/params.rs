//! Model parameters shared by the BESQ, VSM, and Wright-Fisher views.

use crate::error::{Error, Result};

/// Dimension parameters of the coupled processes.
///
/// Stored as the BESQ dimension vector `θ`; the VSM / Wright-Fisher
/// parameters are `δ = θ/2`, with totals `θ₀ = Σθᵢ` and `d = Σδᵢ`.
/// The weight exponents are `νᵢ = θᵢ/2 − 1` and the log-drift of the total
/// market is `γ = (d−1)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    theta: Vec<f64>,
    theta0: f64,
}

impl ModelParams {
    /// From BESQ dimensions `θ`.
    pub fn from_theta(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::domain("parameter vector must be nonempty"));
        }
        for &t in &theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain(format!(
                    "BESQ dimensions must be positive and finite, got {t}"
                )));
            }
        }
        let theta0 = theta.iter().sum();
        Ok(ModelParams { theta, theta0 })
    }

    /// From VSM / Wright-Fisher parameters `δ`; sets `θ = 2δ`.
    pub fn from_delta(delta: &[f64]) -> Result<Self> {
        Self::from_theta(delta.iter().map(|d| 2.0 * d).collect())
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn delta(&self) -> Vec<f64> {
        self.theta.iter().map(|t| 0.5 * t).collect()
    }

    pub fn d(&self) -> f64 {
        0.5 * self.theta0
    }

    /// Weight exponents `νᵢ = θᵢ/2 − 1`.
    pub fn nu(&self) -> Vec<f64> {
        self.theta.iter().map(|t| 0.5 * t - 1.0).collect()
    }

    /// `ν₀ = Σνᵢ`. Derived bookkeeping only; nothing downstream consumes it.
    pub fn nu0(&self) -> f64 {
        0.5 * self.theta0 - self.n() as f64
    }

    /// Drift `γ = (d − 1)/2` of the log total market.
    pub fn gamma(&self) -> f64 {
        0.5 * (self.d() - 1.0)
    }

    /// Exit-time and transition-density formulas need the total sum process
    /// transient, i.e. `θ₀ > 2` (equivalently `d > 1`).
    pub fn require_transient(&self) -> Result<()> {
        if self.theta0 <= 2.0 {
            return Err(Error::domain(format!(
                "operation requires θ₀ > 2 (d > 1), got θ₀ = {}",
                self.theta0
            )));
        }
        Ok(())
    }
}
