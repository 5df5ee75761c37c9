//! Closed-form densities.
//!
//! The centerpiece is the exit density of an independent BESQ vector from
//! the unit simplex, evaluated on the face `Σy = 1`:
//!
//! ```text
//!  φ_z(y) = (1−S_z) Σ_m  Γ(2m+θ₀/2)/(m! Γ(m+θ₀/2)) (1+S_z)^{−2m−θ₀/2}
//!           Σ_{|k|=m} (m;k) z^k Dir(y; k+θ/2),
//! ```
//!
//! a Dirichlet mixture whose weights decay geometrically with ratio
//! `4S_z/(1+S_z)²`. The market-weight density at the time the total market
//! hits level `a` is the same expression with `θ = 2δ` and start `z = x/a`.
//! Densities are taken with respect to Lebesgue measure on the first `n−1`
//! coordinates of the face.

use crate::error::{Error, Result};
use crate::mixture::DirichletMixture;
use crate::params::ModelParams;
use crate::scaled::ScaledF64;
use crate::series::SeriesControl;
use crate::simplex::{QuadrantPoint, SimplexPoint};
use crate::special::log_gamma;

/// Inner composition sums are evaluated exactly; the cost is polynomial but
/// the coefficient count grows like `M^{n-1}`, so high dimensions refuse
/// rather than silently approximate.
pub const MAX_MIXTURE_DIMENSION: usize = 8;

/// One exit-density evaluation request.
#[derive(Clone, Debug)]
pub struct ExitDensityQuery {
    pub z: QuadrantPoint,
    pub y: SimplexPoint,
    pub params: ModelParams,
    pub ctrl: SeriesControl,
}

/// Reusable evaluator for `φ_z(·)`; batch callers (quadrature, binning)
/// build it once and share the precomputed mixture weights across `y`.
pub struct ExitDensityEvaluator {
    mixture: DirichletMixture,
    terms: usize,
}

impl ExitDensityEvaluator {
    pub fn new(z: &QuadrantPoint, params: &ModelParams, ctrl: &SeriesControl) -> Result<Self> {
        ctrl.validate()?;
        params.require_transient()?;
        if z.n() != params.n() {
            return Err(Error::Dimension("start dimension must match parameters".into()));
        }
        if params.n() > MAX_MIXTURE_DIMENSION {
            return Err(Error::Dimension(format!(
                "mixture evaluation supports n <= {MAX_MIXTURE_DIMENSION}, got n = {}",
                params.n()
            )));
        }
        let s = z.sum();
        if s >= 1.0 {
            return Err(if s == 1.0 {
                Error::DegenerateDistribution(
                    "start on the face: the exit state is the start itself".into(),
                )
            } else {
                Error::domain(format!("start must satisfy Σz < 1, got {s}"))
            });
        }
        let r = 0.5 * params.theta0();
        let rho = 4.0 * s / ((1.0 + s) * (1.0 + s)); // = 4pq with p = s/(1+s)

        // choose the truncation from the integrated masses
        //   mass_m = (1−s)·Γ(2m+r)/(m!Γ(m+r))·(1+s)^{−2m−r}·s^m,
        // whose ratio approaches 4pq from below once m ≳ r²; certify the
        // tail there and pad.
        let mut ln_mass = (1.0 - s).ln() - r * (1.0 + s).ln();
        let tail_factor = if rho > 0.0 { rho / (1.0 - rho) } else { 0.0 };
        let target = 0.1 * ctrl.abs_tol;
        let m_min = (0.5 * r * r).ceil() as usize + 4;
        let mut m = 0usize;
        let mmax = loop {
            if m >= m_min && ln_mass.exp() * tail_factor < target {
                break m;
            }
            if m >= ctrl.max_terms {
                return Err(Error::Truncation(format!(
                    "mass tail not below {target:.1e} within {} terms (S_z = {s})",
                    ctrl.max_terms
                )));
            }
            let mf = m as f64;
            if s > 0.0 {
                ln_mass += ((2.0 * mf + r) * (2.0 * mf + r + 1.0)
                    / ((mf + 1.0) * (mf + r)))
                .ln()
                    + s.ln()
                    - 2.0 * (1.0 + s).ln();
            } else {
                ln_mass = f64::NEG_INFINITY;
            }
            m += 1;
        };
        let mmax = (mmax + (mmax / 4).max(8)).min(ctrl.max_terms);

        // outer weights A_m = (1−s)·Γ(2m+r)·(1+s)^{−2m−r}
        let mut outer = Vec::with_capacity(mmax + 1);
        let mut a = ScaledF64::from_ln((1.0 - s).ln() + log_gamma(r)? - r * (1.0 + s).ln());
        let inv1s2 = 1.0 / ((1.0 + s) * (1.0 + s));
        for m in 0..=mmax {
            outer.push(a);
            let mf = m as f64;
            a = a.mul_f64((2.0 * mf + r) * (2.0 * mf + r + 1.0) * inv1s2);
        }
        let mixture = DirichletMixture::new(
            params.delta(),
            z.coords().to_vec(),
            outer,
            rho,
            ctrl.abs_tol,
            ctrl.rel_tol,
        )?;
        Ok(ExitDensityEvaluator { mixture, terms: mmax })
    }

    /// Density value at `y`; `+∞` on a face where `θᵢ < 2`, zero where
    /// `θᵢ > 2`.
    pub fn eval(&self, y: &SimplexPoint) -> Result<f64> {
        self.mixture.eval(y)
    }

    /// Number of mixture terms retained.
    pub fn terms(&self) -> usize {
        self.terms
    }
}

/// Density of the BESQ vector at its exit from the unit simplex.
pub fn exit_density(q: &ExitDensityQuery) -> Result<f64> {
    ExitDensityEvaluator::new(&q.z, &q.params, &q.ctrl)?.eval(&q.y)
}

/// Joint density of the market weights at the first time the total market
/// `S` hits level `a ≥ Σx`. Scaling reduces this to the exit density with
/// `θ = 2δ` and start `x/a`.
pub fn market_weight_exit_density(
    x: &QuadrantPoint,
    a: f64,
    delta: &[f64],
    y: &SimplexPoint,
    ctrl: &SeriesControl,
) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("target level must be positive, got {a}")));
    }
    if x.sum() > a {
        return Err(Error::domain(format!(
            "start must satisfy Σx <= a, got Σx = {} and a = {a}",
            x.sum()
        )));
    }
    let params = ModelParams::from_delta(delta)?;
    let z = QuadrantPoint::new(x.coords().iter().map(|&c| c / a).collect())?;
    ExitDensityEvaluator::new(&z, &params, ctrl)?.eval(y)
}

/// The resummed total mass `(1−s)·q/(1−2p)` with `p = s/(1+s)`, `q = 1−p`.
///
/// Analytically this is 1 for every `s ∈ (0,1)` and integer `r = θ₀/2 ≥ 1`;
/// it is evaluated as the displayed expression so it doubles as a
/// regression check on the resummation.
pub fn exit_mass_closed_form(s: f64, r: u32) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("need 0 < s < 1, got {s}")));
    }
    if r == 0 {
        return Err(Error::domain("r = θ₀/2 must be a positive integer"));
    }
    let p = s / (1.0 + s);
    let q = 1.0 - p;
    Ok((1.0 - s) * q / (1.0 - 2.0 * p))
}

/// Density of the hitting time `ς_a` of level `a` by the total market
/// started at `s`: with `ρ = ln(a/s)` and `γ = (d−1)/2`,
/// `ρ/√(2πt³) · exp(−(ρ−γt)²/2t)`.
///
/// `a = s` makes the law a point mass at zero, reported as
/// [`Error::DegenerateDistribution`] rather than a density value.
pub fn hitting_time_density(s: f64, a: f64, d: f64, t: f64) -> Result<f64> {
    let (rho, gamma) = hitting_params(s, a, d)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if rho == 0.0 {
        return Err(Error::DegenerateDistribution(
            "a = s: the hitting time is identically zero".into(),
        ));
    }
    let dev = rho - gamma * t;
    Ok(rho / (2.0 * std::f64::consts::PI * t * t * t).sqrt() * (-dev * dev / (2.0 * t)).exp())
}

/// Distribution function of the same hitting time, from the reflection
/// formula for drifted Brownian first passage.
pub fn hitting_time_cdf(s: f64, a: f64, d: f64, t: f64) -> Result<f64> {
    let (rho, gamma) = hitting_params(s, a, d)?;
    if rho == 0.0 {
        return Err(Error::DegenerateDistribution(
            "a = s: the hitting time is identically zero".into(),
        ));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let sq = t.sqrt();
    let phi = |x: f64| 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
    let first = phi((gamma * t - rho) / sq);
    let tail = statrs::function::erf::erfc((gamma * t + rho) / (sq * std::f64::consts::SQRT_2));
    let second = if tail > 0.0 { (2.0 * gamma * rho + (0.5 * tail).ln()).exp() } else { 0.0 };
    Ok((first + second).clamp(0.0, 1.0))
}

fn hitting_params(s: f64, a: f64, d: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("start must be positive, got {s}")));
    }
    if a < s {
        return Err(Error::domain(format!("target {a} below start {s}")));
    }
    if !(d > 1.0) {
        return Err(Error::domain(format!("need d > 1, got {d}")));
    }
    Ok(((a / s).ln(), 0.5 * (d - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::dirichlet_log_density;
    use crate::verify::{simplex_quadrature, SimplexGrid};

    fn ctrl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn zero_start_reduces_to_dirichlet() {
        let params = ModelParams::from_theta(vec![1.0, 2.0, 3.0]).unwrap();
        let z = QuadrantPoint::new(vec![0.0, 0.0, 0.0]).unwrap();
        let ev = ExitDensityEvaluator::new(&z, &params, &ctrl()).unwrap();
        let delta = params.delta();
        for &(a, b) in &[(0.2, 0.3), (0.05, 0.9), (0.6, 0.15), (0.33, 0.33)] {
            let y = SimplexPoint::from_chart(&[a, b]).unwrap();
            let got = ev.eval(&y).unwrap();
            let expect = dirichlet_log_density(&y, &delta).unwrap().exp();
            assert!(
                ((got - expect) / expect).abs() < 1e-12,
                "at ({a},{b}): {got} vs {expect}"
            );
        }
    }

    #[test]
    fn normalizes_on_the_face() {
        // singular face y₁ (θ₁ = 1): declared exponents absorb it
        let params = ModelParams::from_theta(vec![1.0, 2.0, 3.0]).unwrap();
        let z = QuadrantPoint::new(vec![0.1, 0.2, 0.3]).unwrap();
        let ev = ExitDensityEvaluator::new(&z, &params, &ctrl()).unwrap();
        let grid = SimplexGrid::new(3, 48).unwrap();
        let q = simplex_quadrature(|y| ev.eval(y), &grid, Some(&params.nu())).unwrap();
        assert!((q.value - 1.0).abs() < 1e-6, "mass {}", q.value);
    }

    #[test]
    fn strongly_singular_parameters_normalize() {
        // min θᵢ < 1: exponent −0.75
        let params = ModelParams::from_theta(vec![0.5, 1.5, 2.0]).unwrap();
        let z = QuadrantPoint::new(vec![0.2, 0.1, 0.15]).unwrap();
        let ev = ExitDensityEvaluator::new(&z, &params, &ctrl()).unwrap();
        let grid = SimplexGrid::new(3, 48).unwrap();
        let q = simplex_quadrature(|y| ev.eval(y), &grid, Some(&params.nu())).unwrap();
        assert!((q.value - 1.0).abs() < 1e-4, "mass {}", q.value);
    }

    #[test]
    fn aggregation_marginal_matches_merged_parameters() {
        // merging the first two coordinates of a 4-component exit density
        // gives the 3-component density with summed θ and z: check the
        // marginal by a one-dimensional fiber integral
        let params4 = ModelParams::from_theta(vec![2.0, 2.0, 2.0, 2.0]).unwrap();
        let z4 = QuadrantPoint::new(vec![0.05, 0.1, 0.15, 0.2]).unwrap();
        let ev4 = ExitDensityEvaluator::new(&z4, &params4, &ctrl()).unwrap();

        let params3 = ModelParams::from_theta(vec![4.0, 2.0, 2.0]).unwrap();
        let z3 = QuadrantPoint::new(vec![0.15, 0.15, 0.2]).unwrap();
        let ev3 = ExitDensityEvaluator::new(&z3, &params3, &ctrl()).unwrap();

        let (nodes, weights) = crate::verify::gauss_jacobi_01(48, 0.0, 0.0).unwrap();
        for &(c, y3, y4) in &[(0.4, 0.25, 0.35), (0.55, 0.3, 0.15), (0.2, 0.5, 0.3)] {
            // ∫₀^c φ₄(u, c−u, y₃, y₄) du over the merged fiber
            let mut marginal = 0.0;
            for (&t, &w) in nodes.iter().zip(&weights) {
                let u = c * t;
                let y = SimplexPoint::new(vec![u, c - u, y3, y4]).unwrap();
                marginal += w * c * ev4.eval(&y).unwrap();
            }
            let merged = ev3.eval(&SimplexPoint::new(vec![c, y3, y4]).unwrap()).unwrap();
            assert!(
                ((marginal - merged) / merged).abs() < 1e-8,
                "fiber at c={c}: {marginal} vs {merged}"
            );
        }
    }

    #[test]
    fn market_weights_reduce_and_scale() {
        let delta = [0.5, 1.0, 1.5];
        let ctrl = ctrl();
        let y = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();

        // x = 0 → Dirichlet(δ)
        let x0 = QuadrantPoint::new(vec![0.0, 0.0, 0.0]).unwrap();
        let got = market_weight_exit_density(&x0, 1.0, &delta, &y, &ctrl).unwrap();
        let expect = dirichlet_log_density(&y, &delta).unwrap().exp();
        assert!(((got - expect) / expect).abs() < 1e-12);

        // θ = 2δ definitional reduction
        let x = QuadrantPoint::new(vec![0.1, 0.2, 0.3]).unwrap();
        let viaweights = market_weight_exit_density(&x, 1.0, &delta, &y, &ctrl).unwrap();
        let params = ModelParams::from_theta(vec![1.0, 2.0, 3.0]).unwrap();
        let direct = exit_density(&ExitDensityQuery {
            z: x.clone(),
            y: y.clone(),
            params,
            ctrl: ctrl.clone(),
        })
        .unwrap();
        assert!(((viaweights - direct) / direct).abs() < 1e-13);

        // scaling invariance: double a and x together
        let x2 = QuadrantPoint::new(vec![0.2, 0.4, 0.6]).unwrap();
        let scaled = market_weight_exit_density(&x2, 2.0, &delta, &y, &ctrl).unwrap();
        assert!(((scaled - viaweights) / viaweights).abs() < 1e-13);
    }

    #[test]
    fn mass_identity_is_one() {
        assert!((exit_mass_closed_form(0.5, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((exit_mass_closed_form(1e-9, 1).unwrap() - 1.0).abs() < 1e-9);
        assert!((exit_mass_closed_form(0.9, 3).unwrap() - 1.0).abs() < 1e-14);
        assert!(exit_mass_closed_form(0.0, 2).is_err());
        assert!(exit_mass_closed_form(1.0, 2).is_err());
    }

    #[test]
    fn hitting_density_values() {
        // ρ = 1, γ = 0.5, t = 1: e^{-1/8}/√(2π)
        let s = 1.0;
        let a = std::f64::consts::E;
        let d = 2.0;
        let got = hitting_time_density(s, a, d, 1.0).unwrap();
        let expect = (-0.125f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
        // spot value of the same expression
        assert!((got - 0.3520653267642995).abs() < 1e-12);

        // t → 0⁺ vanishes
        assert!(hitting_time_density(s, a, d, 1e-6).unwrap() < 1e-100);

        // degenerate signal at a = s
        assert!(matches!(
            hitting_time_density(1.0, 1.0, 2.0, 0.5),
            Err(Error::DegenerateDistribution(_))
        ));
        assert!(hitting_time_density(1.0, 0.5, 2.0, 0.5).is_err());
        assert!(hitting_time_density(1.0, 2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn hitting_density_integrates_to_one() {
        // log-time trapezoid: the integrand decays doubly exponentially in
        // x = ln t on both sides
        let (s, a, d) = (1.0, std::f64::consts::E, 2.0);
        let h = 0.02;
        let mut total = 0.0;
        let mut x: f64 = -14.0;
        while x <= 14.0 {
            let t = x.exp();
            total += h * t * hitting_time_density(s, a, d, t).unwrap();
            x += h;
        }
        assert!((total - 1.0).abs() < 1e-8, "mass {total}");
    }

    #[test]
    fn hitting_cdf_matches_density() {
        let (s, a, d) = (0.5, 1.0, 3.0);
        // CDF increment over [t, t+dt] ≈ density·dt
        for &t in &[0.2, 0.5, 1.0, 2.5] {
            let dt = 1e-5;
            let slope =
                (hitting_time_cdf(s, a, d, t + dt).unwrap() - hitting_time_cdf(s, a, d, t).unwrap())
                    / dt;
            let dens = hitting_time_density(s, a, d, t).unwrap();
            assert!(
                ((slope - dens) / dens).abs() < 1e-3,
                "t = {t}: slope {slope} vs density {dens}"
            );
        }
        assert!(hitting_time_cdf(s, a, d, 1e9).unwrap() > 1.0 - 1e-12);
        assert_eq!(hitting_time_cdf(s, a, d, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn refuses_high_dimension_and_bad_starts() {
        let params = ModelParams::from_theta(vec![1.0; 9]).unwrap();
        let z = QuadrantPoint::new(vec![0.05; 9]).unwrap();
        assert!(matches!(
            ExitDensityEvaluator::new(&z, &params, &ctrl()),
            Err(Error::Dimension(_))
        ));

        let params = ModelParams::from_theta(vec![2.0, 2.0]).unwrap();
        let z = QuadrantPoint::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            ExitDensityEvaluator::new(&z, &params, &ctrl()),
            Err(Error::DegenerateDistribution(_))
        ));
    }
}
