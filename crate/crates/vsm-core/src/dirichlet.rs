//! Dirichlet log-density and sampling.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;
use crate::special::log_gamma;

/// Log of the Dirichlet density `Γ(Σγ)/∏Γ(γᵢ) · ∏ yᵢ^{γᵢ−1}` with respect
/// to Lebesgue measure on the first `n−1` coordinates.
///
/// At a boundary point `yᵢ = 0` the value is `+∞` when `γᵢ < 1` (integrable
/// singularity) and `-∞` when `γᵢ > 1` (the density vanishes).
pub fn dirichlet_log_density(y: &SimplexPoint, gamma: &[f64]) -> Result<f64> {
    if y.n() != gamma.len() {
        return Err(Error::Dimension(format!(
            "point has {} coordinates but γ has {}",
            y.n(),
            gamma.len()
        )));
    }
    for &g in gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::domain(format!("Dirichlet parameters must be positive, got {g}")));
        }
    }
    let total: f64 = gamma.iter().sum();
    let mut logden = log_gamma(total)?;
    for (&yi, &gi) in y.coords().iter().zip(gamma) {
        logden -= log_gamma(gi)?;
        if yi == 0.0 {
            if gi < 1.0 {
                return Ok(f64::INFINITY);
            }
            if gi > 1.0 {
                return Ok(f64::NEG_INFINITY);
            }
            // γᵢ = 1: factor is 1, contributes nothing
        } else {
            logden += (gi - 1.0) * yi.ln();
        }
    }
    Ok(logden)
}

/// Draws from Dirichlet(γ) by normalizing independent Gamma(γᵢ, 1) variates.
pub fn dirichlet_sample<R: Rng + ?Sized>(gamma: &[f64], rng: &mut R) -> Result<SimplexPoint> {
    for &g in gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::domain(format!("Dirichlet parameters must be positive, got {g}")));
        }
    }
    if gamma.len() == 1 {
        return SimplexPoint::new(vec![1.0]);
    }
    loop {
        let draws: Vec<f64> = gamma
            .iter()
            .map(|&g| Gamma::new(g, 1.0).expect("validated shape").sample(rng))
            .collect();
        let sum: f64 = draws.iter().sum();
        // all-zero draws are possible for tiny shapes; retry
        if sum > 0.0 {
            return SimplexPoint::new(draws.iter().map(|d| d / sum).collect());
        }
    }
}
