//! Shared evaluation engine for the Dirichlet-mixture series.
//!
//! Every closed form in this crate — the potential and Green kernels, the
//! simplex exit density, and the Wright-Fisher transition density — has the
//! same inner structure: an outer sum over `m` of per-`m` weights times
//!
//! ```text
//!   Σ_{k₁+…+kₙ=m}  ∏ᵢ  wᵢ^{kᵢ} / ( kᵢ! · Γ(kᵢ + γᵢ) )
//! ```
//!
//! with `wᵢ = xᵢ yᵢ` (kernels) or `wᵢ = zᵢ yᵢ` (densities). Rather than
//! enumerating compositions, the inner sum is the `m`-th coefficient of the
//! product of `n` single-variable series, computed by polynomial
//! convolution in [`ScaledF64`] arithmetic: cost `O(n·M²)` for all
//! `m ≤ M` at once, immune to overflow and underflow.

use crate::error::{Error, Result};
use crate::scaled::ScaledF64;
use crate::simplex::SimplexPoint;
use crate::special::log_gamma;

/// Coefficients `g(j) = w^j / (j! Γ(j+γ))` for `j ≤ mmax`.
fn coord_series(w: f64, ln_gamma_g: f64, gamma: f64, mmax: usize) -> Vec<ScaledF64> {
    let mut out = Vec::with_capacity(mmax + 1);
    let mut g = ScaledF64::from_ln(-ln_gamma_g);
    out.push(g);
    for j in 1..=mmax {
        g = g.mul_f64(w / (j as f64 * (j as f64 - 1.0 + gamma)));
        out.push(g);
    }
    out
}

fn convolve(a: &[ScaledF64], b: &[ScaledF64], mmax: usize) -> Vec<ScaledF64> {
    let mut out = vec![ScaledF64::ZERO; mmax + 1];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut acc = ScaledF64::ZERO;
        for j in 0..=m {
            acc = acc.add(a[j].mul(b[m - j]));
        }
        *slot = acc;
    }
    out
}

/// The composition sums `Σ_{|k|=m} ∏ wᵢ^{kᵢ}/(kᵢ! Γ(kᵢ+γᵢ))` for all `m ≤ mmax`.
pub(crate) fn kernel_conv(
    w: &[f64],
    gamma: &[f64],
    ln_gamma_g: &[f64],
    mmax: usize,
) -> Vec<ScaledF64> {
    let mut acc = coord_series(w[0], ln_gamma_g[0], gamma[0], mmax);
    for i in 1..w.len() {
        let next = coord_series(w[i], ln_gamma_g[i], gamma[i], mmax);
        acc = convolve(&acc, &next, mmax);
    }
    acc
}

/// A density of the form `∏ yᵢ^{γᵢ−1} · Σ_m outer(m) · conv_m(z∘y)` on the
/// simplex face, evaluated with respect to Lebesgue measure on the first
/// `n−1` coordinates.
///
/// Both the exit density (`outer` from the start point and `Γ(2m+θ₀/2)`
/// factors) and the transition density (`outer` from `Γ(2m+d)·b_m(t)`) are
/// instances; batching over many `y` reuses the precomputed outer weights.
pub(crate) struct DirichletMixture {
    pub gamma: Vec<f64>,
    pub z: Vec<f64>,
    /// Per-`m` outer weights, sign included.
    pub outer: Vec<ScaledF64>,
    /// Geometric bound on the pointwise term ratio, used for the tail
    /// certificate; must be < 1.
    pub ratio_bound: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    ln_gamma_g: Vec<f64>,
}

impl DirichletMixture {
    pub fn new(
        gamma: Vec<f64>,
        z: Vec<f64>,
        outer: Vec<ScaledF64>,
        ratio_bound: f64,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<Self> {
        let ln_gamma_g = gamma.iter().map(|&g| log_gamma(g)).collect::<Result<Vec<f64>>>()?;
        Ok(DirichletMixture { gamma, z, outer, ratio_bound, abs_tol, rel_tol, ln_gamma_g })
    }

    /// Evaluates the mixture at `y`.
    ///
    /// Boundary behavior follows the Dirichlet factors: `+∞` when some
    /// `yᵢ = 0` with `γᵢ < 1`, `0` when `γᵢ > 1` there.
    pub fn eval(&self, y: &SimplexPoint) -> Result<f64> {
        if y.n() != self.gamma.len() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, mixture {}",
                y.n(),
                self.gamma.len()
            )));
        }
        let mut ln_prefactor = 0.0;
        for (&yi, &gi) in y.coords().iter().zip(&self.gamma) {
            if yi == 0.0 {
                if gi < 1.0 {
                    return Ok(f64::INFINITY);
                }
                if gi > 1.0 {
                    return Ok(0.0);
                }
            } else {
                ln_prefactor += (gi - 1.0) * yi.ln();
            }
        }
        let mmax = self.outer.len() - 1;
        let w: Vec<f64> = self.z.iter().zip(y.coords()).map(|(&z, &y)| z * y).collect();
        let conv = kernel_conv(&w, &self.gamma, &self.ln_gamma_g, mmax);

        let mut sum = ScaledF64::ZERO;
        let mut last = ScaledF64::ZERO;
        for m in 0..=mmax {
            last = self.outer[m].mul(conv[m]);
            sum = sum.add(last);
        }
        let prefactor = ScaledF64::from_ln(ln_prefactor);
        let value = sum.mul(prefactor).to_f64();

        // tail certificate on the realized final term
        let rho = self.ratio_bound.min(0.999);
        let tail = last.abs().mul(prefactor).to_f64() * rho / (1.0 - rho);
        if tail > self.abs_tol.max(self.rel_tol * value.abs()) {
            return Err(Error::Truncation(format!(
                "tail bound {tail:.3e} exceeds tolerance at m = {mmax} (value {value:.6e})"
            )));
        }
        Ok(value)
    }
}
