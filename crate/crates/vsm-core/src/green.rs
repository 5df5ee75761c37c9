//! Inversion map, Kelvin transform, potential and Green kernels, and a
//! finite-difference applicator for the BESQ generator
//! `𝓛 = Σ θᵢ ∂ᵢ + 2 Σ zᵢ ∂ᵢ²`.
//!
//! The potential kernel of the transient vector process is
//!
//! ```text
//!  u(x,y) = ½ S^{1−θ₀/2} y^ν Σ_m Γ(θ₀/2−1+2m) S^{−2m} Σ_{|k|=m} (m;k) ∏ (xᵢyᵢ)^{kᵢ}/Γ(θᵢ/2+kᵢ),
//! ```
//!
//! with `S = Σ(xᵢ+yᵢ)`, and the Green kernel on the unit simplex is
//! `v(x,y) = u(x,y) − K[u_y](x)`, which collapses the two `S`-powers into
//! the bracket `(Sx+Sy)^{−2m+1−θ₀/2} − (SxSy+1)^{−2m+1−θ₀/2}`.

use crate::error::{Error, Result};
use crate::mixture::kernel_conv;
use crate::params::ModelParams;
use crate::scaled::ScaledF64;
use crate::series::SeriesControl;
use crate::simplex::QuadrantPoint;
use crate::special::log_gamma;

/// The weight `ω(x) = ∏ xᵢ^{θᵢ/2 − 1}` that makes `𝓛` symmetric.
#[derive(Clone, Debug)]
pub struct WeightFn {
    params: ModelParams,
}

impl WeightFn {
    pub fn new(params: ModelParams) -> Self {
        WeightFn { params }
    }

    pub fn log_eval(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.params.nu())
            .map(|(&xi, nu)| if nu == 0.0 { 0.0 } else { nu * xi.ln() })
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.log_eval(x).exp()
    }
}

/// `I(z) = z / (Σz)²`; an involution fixing the face `Σz = 1`.
pub fn inversion_map(z: &QuadrantPoint) -> Result<QuadrantPoint> {
    let s = z.sum();
    if s <= 0.0 {
        return Err(Error::domain("inversion map is undefined at the origin"));
    }
    QuadrantPoint::new(z.coords().iter().map(|&c| c / (s * s)).collect())
}

/// Kelvin transform `K[f](z) = (Σz)^{1−θ₀/2} f(I(z))`.
pub fn kelvin_transform<F>(f: F, z: &QuadrantPoint, params: &ModelParams) -> Result<f64>
where
    F: Fn(&QuadrantPoint) -> Result<f64>,
{
    params.require_transient()?;
    let s = z.sum();
    if s <= 0.0 {
        return Err(Error::domain("Kelvin transform is undefined at the origin"));
    }
    let inverted = inversion_map(z)?;
    Ok(s.powf(1.0 - 0.5 * params.theta0()) * f(&inverted)?)
}

/// Sums `Σ_m Γ(θ₀/2−1+2m) · bracket_m · conv_m` adaptively.
///
/// `brackets(mmax)` supplies the per-`m` S-power (or Green bracket) for
/// `m ≤ mmax`, built by recurrence so every term carries only a few ulp of
/// rounding. The term ratio approaches `ratio = (Σ 2√wᵢ / A)²` with
/// `A = Sx+Sy`; the tail is certified geometrically against that estimate,
/// guarded by the observed ratio.
fn kernel_series<B>(
    w: &[f64],
    gamma: &[f64],
    theta0: f64,
    brackets: B,
    ratio: f64,
    ctrl: &SeriesControl,
) -> Result<ScaledF64>
where
    B: Fn(usize) -> Vec<ScaledF64>,
{
    ctrl.validate()?;
    let ln_gamma_g = gamma.iter().map(|&g| log_gamma(g)).collect::<Result<Vec<f64>>>()?;
    let r = 0.5 * theta0;
    let rho = ratio.min(0.995);
    let mut mmax = 24usize.min(ctrl.max_terms);
    loop {
        let conv = kernel_conv(w, gamma, &ln_gamma_g, mmax);
        let bracket = brackets(mmax);
        let mut gm = ScaledF64::from_ln(log_gamma(r - 1.0)?);
        let mut sum = ScaledF64::ZERO;
        let mut prev = f64::INFINITY;
        for (m, cm) in conv.iter().enumerate() {
            let term = gm.mul(bracket[m]).mul(*cm);
            sum = sum.add(term);
            let t_abs = term.abs().to_f64();
            if m >= 2 && t_abs <= prev {
                let observed = if prev > 0.0 { t_abs / prev } else { 0.0 };
                let rho_eff = rho.max(observed.min(0.999));
                let tail = t_abs * rho_eff / (1.0 - rho_eff);
                if observed <= rho_eff + 0.02
                    && tail <= ctrl.abs_tol.max(ctrl.rel_tol * sum.abs().to_f64())
                {
                    return Ok(sum);
                }
            }
            prev = t_abs;
            gm = gm.mul_f64((r - 1.0 + 2.0 * m as f64) * (r + 2.0 * m as f64));
        }
        if mmax >= ctrl.max_terms {
            return Err(Error::Truncation(format!(
                "kernel series not certified after {mmax} terms (asymptotic ratio {ratio:.4})"
            )));
        }
        mmax = (mmax * 2).min(ctrl.max_terms);
    }
}

/// Asymptotic term ratio of the kernel series: `(Σ 2√wᵢ)² / A²`.
fn series_ratio(w: &[f64], a: f64) -> f64 {
    let root_sum: f64 = w.iter().map(|&wi| wi.sqrt()).sum();
    (2.0 * root_sum / a).powi(2)
}

fn check_weight_domain(y: &QuadrantPoint, params: &ModelParams) -> Result<()> {
    for (&yi, &ti) in y.coords().iter().zip(params.theta()) {
        if yi == 0.0 && ti < 2.0 {
            return Err(Error::domain(
                "kernel requires yᵢ > 0 wherever θᵢ < 2 (the weight y^ν diverges)",
            ));
        }
    }
    Ok(())
}

/// Potential kernel `u(x,y)` of the independent BESQ vector, `θ₀ > 2`.
pub fn potential_kernel_u(
    x: &QuadrantPoint,
    y: &QuadrantPoint,
    params: &ModelParams,
    ctrl: &SeriesControl,
) -> Result<f64> {
    params.require_transient()?;
    if x.n() != params.n() || y.n() != params.n() {
        return Err(Error::Dimension("kernel arguments must match parameter dimension".into()));
    }
    check_weight_domain(y, params)?;
    let sx = x.sum();
    let sy = y.sum();
    let s = sx + sy;
    if s <= 0.0 {
        return Err(Error::domain("potential kernel needs Σx + Σy > 0"));
    }
    let gamma = params.delta();
    let w: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(&a, &b)| a * b).collect();
    let eta0 = 1.0 - 0.5 * params.theta0();
    // bracket_m = S^{1−θ₀/2−2m}, by recurrence in m
    let s_inv2 = ScaledF64::from_f64(1.0 / s).mul(ScaledF64::from_f64(1.0 / s));
    let first = ScaledF64::from_ln(eta0 * s.ln());
    let sum = kernel_series(
        &w,
        &gamma,
        params.theta0(),
        |mmax| {
            let mut out = Vec::with_capacity(mmax + 1);
            let mut b = first;
            for _ in 0..=mmax {
                out.push(b);
                b = b.mul(s_inv2);
            }
            out
        },
        series_ratio(&w, s),
        ctrl,
    )?;
    let weight = ScaledF64::from_ln(weight_log(y.coords(), params));
    Ok(sum.mul(weight).mul_f64(0.5).to_f64())
}

fn weight_log(y: &[f64], params: &ModelParams) -> f64 {
    y.iter()
        .zip(params.nu())
        .map(|(&yi, nu)| if nu == 0.0 { 0.0 } else { nu * yi.ln() })
        .sum()
}

/// Green kernel `v(x,y)` of the vector process killed on leaving the unit
/// simplex; zero when either argument lies on the face `Σ = 1`.
pub fn green_kernel_v(
    x: &QuadrantPoint,
    y: &QuadrantPoint,
    params: &ModelParams,
    ctrl: &SeriesControl,
) -> Result<f64> {
    params.require_transient()?;
    if x.n() != params.n() || y.n() != params.n() {
        return Err(Error::Dimension("kernel arguments must match parameter dimension".into()));
    }
    check_weight_domain(y, params)?;
    let sx = x.sum();
    let sy = y.sum();
    if sx > 1.0 + 1e-12 || sy > 1.0 + 1e-12 {
        return Err(Error::domain("Green kernel arguments must lie in the unit simplex"));
    }
    let a = sx + sy;
    if a <= 0.0 {
        return Err(Error::domain("Green kernel needs Σx + Σy > 0"));
    }
    let gamma = params.delta();
    let w: Vec<f64> = x.coords().iter().zip(y.coords()).map(|(&a, &b)| a * b).collect();
    let eta0 = 1.0 - 0.5 * params.theta0();
    // bracket_m = A^η − C^η with η = 1−θ₀/2−2m, A = Sx+Sy, C = SxSy+1;
    // written as A^η·(1 − (C/A)^η) with C−A = (1−Sx)(1−Sy) formed as a
    // product, so the near-face cancellation keeps full relative precision
    let a_inv2 = ScaledF64::from_f64(1.0 / a).mul(ScaledF64::from_f64(1.0 / a));
    let first = ScaledF64::from_ln(eta0 * a.ln());
    let log_ratio = ((1.0 - sx) * (1.0 - sy) / a).ln_1p();
    let sum = kernel_series(
        &w,
        &gamma,
        params.theta0(),
        |mmax| {
            let mut out = Vec::with_capacity(mmax + 1);
            let mut apow = first;
            for m in 0..=mmax {
                let eta = eta0 - 2.0 * m as f64;
                out.push(apow.mul_f64(-f64::exp_m1(eta * log_ratio)));
                apow = apow.mul(a_inv2);
            }
            out
        },
        series_ratio(&w, a),
        ctrl,
    )?;
    let weight = ScaledF64::from_ln(weight_log(y.coords(), params));
    Ok(sum.mul(weight).mul_f64(0.5).to_f64())
}

/// A finite-difference application of `𝓛`, with the magnitudes needed to
/// judge how small "zero" should be.
#[derive(Clone, Copy, Debug)]
pub struct GeneratorFd {
    /// `Σ θᵢ Dᵢf + 2 Σ zᵢ Dᵢᵢf` with central differences of step `h`.
    pub value: f64,
    /// `Σ θᵢ|Dᵢf| + 2Σ zᵢ|Dᵢᵢf|`: the scale of the terms that cancel.
    pub term_scale: f64,
    /// Sum of the absolute values of every finite-difference contribution;
    /// multiplied by machine epsilon this bounds the rounding floor.
    pub fd_magnitude: f64,
}

/// Central-difference `𝓛f` at an interior point with margin `≥ h`.
pub fn apply_generator_fd<F>(f: F, z: &[f64], params: &ModelParams, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    apply_generator_fd_detailed(f, z, params, h).map(|g| g.value)
}

pub fn apply_generator_fd_detailed<F>(
    f: F,
    z: &[f64],
    params: &ModelParams,
    h: f64,
) -> Result<GeneratorFd>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if z.len() != params.n() {
        return Err(Error::Dimension("point dimension must match parameters".into()));
    }
    if !(h > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    for &zi in z {
        if zi <= h {
            return Err(Error::domain(format!(
                "point must keep margin > h = {h} from the faces, got coordinate {zi}"
            )));
        }
    }
    let f0 = f(z)?;
    let mut value = 0.0;
    let mut term_scale = 0.0;
    let mut fd_magnitude = 0.0;
    let mut probe = z.to_vec();
    for i in 0..z.len() {
        probe[i] = z[i] + h;
        let fp = f(&probe)?;
        probe[i] = z[i] - h;
        let fm = f(&probe)?;
        probe[i] = z[i];
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        let th = params.theta()[i];
        value += th * d1 + 2.0 * z[i] * d2;
        term_scale += th * d1.abs() + 2.0 * z[i] * d2.abs();
        fd_magnitude += th * (fp.abs() + fm.abs()) / (2.0 * h)
            + 2.0 * z[i] * (fp.abs() + 2.0 * f0.abs() + fm.abs()) / (h * h);
    }
    Ok(GeneratorFd { value, term_scale, fd_magnitude })
}
