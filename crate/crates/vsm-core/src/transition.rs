//! Wright-Fisher / market-weight transition density via numerical Laplace
//! inversion.
//!
//! The transition density of the weights is the Dirichlet mixture
//!
//! ```text
//!  p(t,ξ,y) = Σ_m Γ(2m+d)/(m!Γ(m+d)) b_m(t) Σ_{|k|=m} (m;k) ξ^k Dir(y; k+δ),
//! ```
//!
//! whose time dependence sits entirely in coefficients `b_m(t)` defined by
//! the Laplace-transform relation (γ = (d−1)/2, all ρ > 0):
//!
//! ```text
//!  ∫₀^∞ b_m(t) t^{−3/2} e^{−γ²t/2} e^{−ρ²/2t} dt
//!      = √(2π) ρ^{−1} e^{−(m+γ)ρ} (1−e^{−ρ}) (1+e^{−ρ})^{−2m−d}.
//! ```
//!
//! Substituting `g(w) = b_m(1/w)·w^{−1/2}·e^{−γ²/(2w)}` turns the left side
//! into an ordinary Laplace transform evaluated at `s = ρ²/2`, so `b_m(t)`
//! is recovered by fixed-Talbot inversion of the right side at `w = 1/t`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mixture::DirichletMixture;
use crate::params::ModelParams;
use crate::scaled::ScaledF64;
use crate::series::SeriesControl;
use crate::simplex::SimplexPoint;
use crate::special::log_gamma;

/// Below this horizon the mixture concentrates near `ξ` and the truncation
/// needed outruns any fixed cap; tables report their total-mass defect
/// instead of failing.
pub const SMALL_T_FLAG: f64 = 0.05;

/// Controls for the fixed-Talbot contour.
#[derive(Clone, Debug)]
pub struct InversionControl {
    /// Nodes on the contour. 32 is accurate to ~1e-9 in double precision;
    /// pushing far beyond 64 *loses* accuracy to rounding.
    pub node_count: usize,
    /// Doubles the node count internally; a cheap extra-care switch for
    /// transforms suspected of slow contour decay.
    pub working_precision_hint: bool,
    /// When nonempty, every computed table is round-trip validated at these
    /// transform arguments (forward quadrature vs the closed form).
    pub validation_rho_grid: Vec<f64>,
}

impl Default for InversionControl {
    fn default() -> Self {
        InversionControl {
            node_count: 32,
            working_precision_hint: false,
            validation_rho_grid: Vec::new(),
        }
    }
}

impl InversionControl {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 16 {
            return Err(Error::domain("node_count must be at least 16"));
        }
        Ok(())
    }

    fn effective_nodes(&self) -> usize {
        if self.working_precision_hint {
            self.node_count * 2
        } else {
            self.node_count
        }
    }
}

fn talbot_sum<F>(transform: &F, u: f64, m: usize) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    // fixed-Talbot contour s(φ) = r·φ(cot φ + i), r = 2M/(5u). Each term is
    // assembled as exp(s·u + ln F(s)) so the exponential prefactor — up to
    // e^{2M/5} — never overflows against a tiny transform value.
    let r = 2.0 * m as f64 / (5.0 * u);
    let term = |s: Complex64, weight: Complex64| -> f64 {
        let f = transform(s);
        if f == Complex64::new(0.0, 0.0) {
            return 0.0;
        }
        let ln_term = s * u + f.ln();
        if ln_term.re < -745.0 {
            return 0.0;
        }
        (ln_term.exp() * weight).re
    };
    let mut acc = 0.5 * term(Complex64::new(r, 0.0), Complex64::new(1.0, 0.0));
    for k in 1..m {
        let phi = k as f64 * std::f64::consts::PI / m as f64;
        let cot = phi.cos() / phi.sin();
        let s = Complex64::new(r * phi * cot, r * phi);
        let sigma = phi + (phi * cot - 1.0) * cot;
        acc += term(s, Complex64::new(1.0, sigma));
    }
    acc * r / m as f64
}

/// Inverts a Laplace transform at `u > 0` by the fixed-Talbot rule.
///
/// The transform must be analytic off the negative real axis (true of every
/// transform in this crate). The result is guarded by a second evaluation
/// at three quarters of the node count — a *coarser* rule, because the
/// rounding floor of the contour sum grows like `ε·e^{2M/5}` and the
/// doubled rule would drown the comparison in its own noise. Disagreement
/// beyond a relative 1e-6 reports [`Error::InversionUnstable`].
pub fn laplace_invert<F>(transform: F, u: f64, ctrl: &InversionControl) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    ctrl.validate()?;
    if !(u > 0.0) {
        return Err(Error::domain(format!("inversion time must be positive, got {u}")));
    }
    let m = ctrl.effective_nodes();
    let value = talbot_sum(&transform, u, m);
    let check = talbot_sum(&transform, u, (3 * m / 4).max(16));
    let scale = value.abs().max(check.abs());
    if scale > 1e-250 && (value - check).abs() > 1e-6 * scale {
        return Err(Error::InversionUnstable(format!(
            "node-count sweep moved the value from {value:.9e} to {check:.9e} at u = {u}"
        )));
    }
    Ok(value)
}

/// Right side of the defining transform, at real `ρ > 0`.
pub fn bm_transform_rhs(d: f64, m: usize, rho: f64) -> f64 {
    let gamma = 0.5 * (d - 1.0);
    let w = (-rho).exp();
    (2.0 * std::f64::consts::PI).sqrt() / rho
        * (-(m as f64 + gamma) * rho).exp()
        * (1.0 - w)
        * (1.0 + w).powf(-(2.0 * m as f64 + d))
}

/// The same function continued to complex `s = ρ²/2`, `ρ = √(2s)` on the
/// principal branch.
fn bm_transform_complex(d: f64, m: usize, s: Complex64) -> Complex64 {
    let gamma = 0.5 * (d - 1.0);
    let rho = (2.0 * s).sqrt();
    let w = (-rho).exp();
    let sqrt2pi = (2.0 * std::f64::consts::PI).sqrt();
    sqrt2pi / rho
        * (-(m as f64 + gamma) * rho).exp()
        * (Complex64::new(1.0, 0.0) - w)
        * ((Complex64::new(1.0, 0.0) + w).ln() * (-(2.0 * m as f64 + d))).exp()
}

/// Mixture coefficients `b_0(t), …, b_M(t)` for one `(d, t)`.
#[derive(Clone, Debug)]
pub struct BmTable {
    pub d: f64,
    pub gamma: f64,
    pub t: f64,
    pub values: Vec<f64>,
    pub node_count: usize,
    pub contour_r: f64,
    mass_partial: f64,
}

impl BmTable {
    /// `Σ_m Γ(2m+d)/(m!Γ(m+d)) b_m(t)` over the stored coefficients;
    /// approaches 1 as the table lengthens (total mass of the density).
    pub fn coefficient_mass(&self) -> f64 {
        self.mass_partial
    }

    /// `|coefficient_mass − 1|`.
    pub fn mass_defect(&self) -> f64 {
        (self.mass_partial - 1.0).abs()
    }
}

/// The weights `c_m = Γ(2m+d)/(m!Γ(m+d))` by recurrence; `c_0 = 1`.
fn coefficient_weights(d: f64, mmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(mmax + 1);
    let mut c = 1.0f64;
    for m in 0..=mmax {
        out.push(c);
        let mf = m as f64;
        c *= (2.0 * mf + d) * (2.0 * mf + d + 1.0) / ((mf + 1.0) * (mf + d));
    }
    out
}

/// Default noise floor on the *weighted* contribution `c_m·b_m`, the unit
/// in which the coefficients enter every density.
const BM_WEIGHTED_FLOOR: f64 = 1e-9;

/// Inverts one coefficient. `abs_floor` is the absolute size below which
/// the caller cannot distinguish the coefficient from zero; values under it
/// come back as exact zeros and the node-sweep stability check is relaxed
/// to it.
fn invert_bm(d: f64, t: f64, m: usize, abs_floor: f64, ctrl: &InversionControl) -> Result<f64> {
    let gamma = 0.5 * (d - 1.0);
    let u = 1.0 / t;
    // The transform decays like e^{−(m+γ)√(2s)}, so the contour sum is
    // perfectly conditioned at M ≈ (5t/4)(m+γ)²; running at μ² times that
    // keeps the truncation error down while the cancellation stays bounded
    // by e^{(m+γ)²t(μ−1)²/2}. Deep-tail coefficients hit the cap, where
    // every contour term is negligible and the result is a clean zero.
    let gm = m as f64 + gamma;
    let mu2 = 1.69;
    let saddle_nodes = (1.25 * t * gm * gm * mu2).ceil() as usize;
    let nodes = ctrl.effective_nodes().max(saddle_nodes).min(2000);
    let transform = |s| bm_transform_complex(d, m, s);
    let unscale = |g: f64| -> f64 {
        if g == 0.0 {
            return 0.0;
        }
        // b_m(t) = g(1/t)·t^{−1/2}·e^{γ²t/2}, assembled in log scale
        let ln_b = g.abs().ln() - 0.5 * t.ln() + 0.5 * gamma * gamma * t;
        g.signum() * ScaledF64::from_ln(ln_b).to_f64()
    };
    let b = unscale(talbot_sum(&transform, u, nodes));
    let b_check = unscale(talbot_sum(&transform, u, (3 * nodes / 4).max(16)));
    let scale = b.abs().max(b_check.abs());
    if (b - b_check).abs() > (1e-6 * scale).max(abs_floor) {
        return Err(Error::InversionUnstable(format!(
            "coefficient m = {m} at t = {t}: node sweep moved b from {b:.9e} to {b_check:.9e}"
        )));
    }
    if b.abs() < abs_floor {
        return Ok(0.0);
    }
    Ok(b)
}

/// Builds the coefficient table by Talbot inversion, one `m` at a time.
///
/// With a nonempty `validation_rho_grid` the table is round-trip checked:
/// the forward quadrature `∫ b_m(t)t^{−3/2}e^{−γ²t/2}e^{−ρ²/2t}dt` must
/// reproduce the closed-form right side within 1e-6 relative at every
/// requested `ρ` (a full re-inversion per quadrature node; expensive and
/// off by default).
pub fn bm_coefficients(d: f64, t: f64, m_max: usize, ctrl: &InversionControl) -> Result<BmTable> {
    if !(d > 1.0) {
        return Err(Error::domain(format!("need d > 1, got {d}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("need t > 0, got {t}")));
    }
    ctrl.validate()?;
    let gamma = 0.5 * (d - 1.0);
    let weights = coefficient_weights(d, m_max);
    let mut values = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let floor = BM_WEIGHTED_FLOOR / weights[m].max(1.0);
        values.push(invert_bm(d, t, m, floor, ctrl)?);
    }
    let mass_partial: f64 = weights.iter().zip(&values).map(|(&c, &b)| c * b).sum();
    for &rho in &ctrl.validation_rho_grid {
        for m in 0..=m_max {
            let err = bm_roundtrip_error(d, m, rho, ctrl)?;
            if err > 1e-6 {
                return Err(Error::InversionUnstable(format!(
                    "round trip at ρ = {rho}, m = {m} off by a relative {err:.3e}"
                )));
            }
        }
    }
    Ok(BmTable {
        d,
        gamma,
        t,
        values,
        node_count: ctrl.effective_nodes(),
        contour_r: 2.0 * ctrl.effective_nodes() as f64 * t / 5.0,
        mass_partial,
    })
}

/// Relative error of the forward transform of the *inverted* coefficient
/// against the closed form at one `ρ`: quadrature on the log-time axis,
/// where the integrand decays doubly exponentially both ways.
pub fn bm_roundtrip_error(d: f64, m: usize, rho: f64, ctrl: &InversionControl) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::domain("transform argument must be positive"));
    }
    let gamma = 0.5 * (d - 1.0);
    let rhs = bm_transform_rhs(d, m, rho);
    let h = 0.05;
    let mut forward = 0.0;
    let mut x = -12.0f64;
    while x <= 12.0 {
        let t = x.exp();
        let envelope = -0.5 * gamma * gamma * t - 0.5 * rho * rho / t - 0.5 * x;
        // skip nodes that cannot contribute at the target accuracy
        if envelope > -46.0 {
            // a coefficient only matters if its node contribution reaches
            // the relative target; ~200 active nodes keep the summed budget
            // an order below the 1e-6 round-trip tolerance
            let floor = 1e-9 * rhs / (h * envelope.exp());
            let b = invert_bm(d, t, m, floor, ctrl)?;
            forward += h * b * envelope.exp();
        }
        x += h;
    }
    Ok((forward - rhs).abs() / rhs.abs())
}

/// Builds the coefficient table adaptively: `m` grows until the partial
/// total mass `Σ c_m b_m` is within tolerance of 1 and the running
/// contribution has decayed. The mass tolerance is `ctrl.abs_tol` floored
/// at 1e-7, the accuracy the inversion itself supports. For
/// `t <` [`SMALL_T_FLAG`] the cap may be reached; the table is then still
/// returned, its [`BmTable::mass_defect`] recording the truncation honestly
/// rather than failing.
pub fn bm_coefficients_adaptive(
    d: f64,
    t: f64,
    ctrl: &SeriesControl,
    inv: &InversionControl,
) -> Result<BmTable> {
    ctrl.validate()?;
    inv.validate()?;
    if !(d > 1.0) {
        return Err(Error::domain(format!("need d > 1, got {d}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("need t > 0, got {t}")));
    }
    let mass_tol = ctrl.abs_tol.max(1e-7);
    let mut values: Vec<f64> = Vec::new();
    let mut cw = 1.0f64; // c_m recurrence
    let mut mass = 0.0f64;
    let mut converged = false;
    for m in 0..=ctrl.max_terms {
        let b = invert_bm(d, t, m, BM_WEIGHTED_FLOOR / cw.max(1.0), inv)?;
        values.push(b);
        let contribution = cw * b;
        mass += contribution;
        if m >= 4 && (mass - 1.0).abs() < mass_tol && contribution.abs() < mass_tol {
            converged = true;
            break;
        }
        let mf = m as f64;
        cw *= (2.0 * mf + d) * (2.0 * mf + d + 1.0) / ((mf + 1.0) * (mf + d));
    }
    if !converged && t >= SMALL_T_FLAG {
        return Err(Error::Truncation(format!(
            "total mass reached {mass:.6} after {} coefficients at t = {t}",
            values.len()
        )));
    }
    Ok(BmTable {
        d,
        gamma: 0.5 * (d - 1.0),
        t,
        values,
        node_count: inv.effective_nodes(),
        contour_r: 2.0 * inv.effective_nodes() as f64 * t / 5.0,
        mass_partial: mass,
    })
}

/// Reusable evaluator for `p(t, ξ, ·)`.
pub struct TransitionDensityEvaluator {
    mixture: DirichletMixture,
    mass_defect: f64,
    terms: usize,
}

impl TransitionDensityEvaluator {
    pub fn new(
        t: f64,
        xi: &SimplexPoint,
        delta: &[f64],
        ctrl: &SeriesControl,
        inv: &InversionControl,
    ) -> Result<Self> {
        let params = ModelParams::from_delta(delta)?;
        params.require_transient()?;
        let table = bm_coefficients_adaptive(params.d(), t, ctrl, inv)?;
        Self::from_table(&table, xi, delta, ctrl)
    }

    /// Assembles the mixture from an existing coefficient table; batch
    /// callers (time integrals, many starts at one `t`) build the table
    /// once and reuse it.
    pub fn from_table(
        table: &BmTable,
        xi: &SimplexPoint,
        delta: &[f64],
        ctrl: &SeriesControl,
    ) -> Result<Self> {
        ctrl.validate()?;
        let params = ModelParams::from_delta(delta)?;
        params.require_transient()?;
        if (params.d() - table.d).abs() > 1e-12 {
            return Err(Error::Dimension(format!(
                "table built for d = {}, parameters give d = {}",
                table.d,
                params.d()
            )));
        }
        if xi.n() != delta.len() {
            return Err(Error::Dimension("start and parameters must agree".into()));
        }
        if delta.len() > crate::density::MAX_MIXTURE_DIMENSION {
            return Err(Error::Dimension(format!(
                "mixture evaluation supports n <= {}, got {}",
                crate::density::MAX_MIXTURE_DIMENSION,
                delta.len()
            )));
        }
        let d = table.d;
        // outer weights Γ(2m+d)·b_m, signed
        let mut outer = Vec::with_capacity(table.values.len());
        let mut ln_g2md = log_gamma(d)?;
        for (m, &b) in table.values.iter().enumerate() {
            if b == 0.0 {
                outer.push(ScaledF64::ZERO);
            } else {
                let v = ScaledF64::from_ln(ln_g2md + b.abs().ln());
                outer.push(if b < 0.0 { v.neg() } else { v });
            }
            let mf = m as f64;
            ln_g2md += ((2.0 * mf + d) * (2.0 * mf + d + 1.0)).ln();
        }
        // the b_m decay is super-geometric past the mass peak, so a generic
        // ratio cap is enough for the per-point tail guard; tolerances sit
        // at the accuracy the coefficient mass itself is built to
        let mixture = DirichletMixture::new(
            delta.to_vec(),
            xi.coords().to_vec(),
            outer,
            0.5,
            ctrl.abs_tol.max(1e-7),
            ctrl.rel_tol.max(1e-7),
        )?;
        Ok(TransitionDensityEvaluator {
            mixture,
            mass_defect: table.mass_defect(),
            terms: table.values.len() - 1,
        })
    }

    pub fn eval(&self, y: &SimplexPoint) -> Result<f64> {
        self.mixture.eval(y)
    }

    /// Distance of the truncated total mass from 1; near zero except in the
    /// flagged small-`t` regime.
    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    pub fn terms(&self) -> usize {
        self.terms
    }
}

/// Transition density `p(t, ξ, y)` of the market weights / Wright-Fisher
/// diffusion with parameters `δ`.
pub fn transition_density(
    t: f64,
    xi: &SimplexPoint,
    y: &SimplexPoint,
    delta: &[f64],
    ctrl: &SeriesControl,
    inv: &InversionControl,
) -> Result<f64> {
    TransitionDensityEvaluator::new(t, xi, delta, ctrl, inv)?.eval(y)
}
