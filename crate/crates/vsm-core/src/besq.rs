//! Squared Bessel (BESQ) processes: exact transition sampling, vector
//! paths, first exit from the unit simplex, and scale-function hitting
//! probabilities.
//!
//! A BESQ process of dimension `θ` solves `dZ = θ dt + 2√Z dβ`. Its
//! transition law started from `x` over a step `t` is an exact
//! Poisson-Gamma mixture: draw `K ~ Poisson(x/2t)`, then
//! `Z(t) ~ Gamma(θ/2 + K, scale 2t)`. Chaining these steps gives marginals
//! with no discretization error; the only bias anywhere in this module is
//! boundary-crossing detection on a grid, which the adaptive step rule
//! confines to `O(dt_min)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::path::Path;
use crate::rng::RngStream;
use crate::simplex::{QuadrantPoint, SimplexPoint};

/// One exact BESQ transition: the law of `BESQ^θ_x(t)`.
///
/// Requires `x ≥ 0`, `θ > 0`, `t > 0`.
pub fn transition_sample<R: Rng + ?Sized>(x: f64, theta: f64, t: f64, rng: &mut R) -> f64 {
    assert!(x >= 0.0 && theta > 0.0 && t > 0.0, "x={x}, theta={theta}, t={t}");
    let lambda = x / (2.0 * t);
    let k = if lambda > 0.0 {
        Poisson::new(lambda).expect("positive rate").sample(rng)
    } else {
        0.0
    };
    let shape = 0.5 * theta + k;
    Gamma::new(shape, 2.0 * t).expect("positive shape").sample(rng)
}

/// Chains exact transitions for `n` independent coordinates along a grid.
///
/// The grid must be strictly increasing and nonnegative. If it starts at 0
/// the first state is `x0` itself.
pub fn besq_path(
    x0: &QuadrantPoint,
    params: &ModelParams,
    times: &[f64],
    rng: &mut RngStream,
) -> Result<Path> {
    if x0.n() != params.n() {
        return Err(Error::Dimension(format!(
            "start has {} coordinates, parameters {}",
            x0.n(),
            params.n()
        )));
    }
    if times.is_empty() {
        return Err(Error::domain("time grid must be nonempty"));
    }
    if times[0] < 0.0 {
        return Err(Error::domain("time grid must be nonnegative"));
    }
    let record = rng.record();
    let mut states = Vec::with_capacity(times.len());
    let mut current = x0.coords().to_vec();
    let mut t_prev = 0.0;
    for &t in times {
        if t > t_prev {
            let dt = t - t_prev;
            for (c, &th) in current.iter_mut().zip(params.theta()) {
                *c = transition_sample(*c, th, dt, rng);
            }
        } else if t < t_prev {
            return Err(Error::domain("time grid must be strictly increasing"));
        }
        states.push(current.clone());
        t_prev = t;
    }
    Path::new(times.to_vec(), states, record)
}

/// Adaptive stepping policy for boundary-crossing walks.
///
/// Steps shrink like the squared distance to the target boundary,
/// `dt = (gap)² / refine_factor`, clamped to `[dt_min, dt_max]`.
#[derive(Clone, Debug)]
pub struct StepControl {
    pub dt_min: f64,
    pub dt_max: f64,
    pub refine_factor: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { dt_min: 1e-6, dt_max: 0.05, refine_factor: 16.0, max_steps: 10_000_000 }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_max >= self.dt_min) {
            return Err(Error::domain("need 0 < dt_min <= dt_max"));
        }
        if !(self.refine_factor > 0.0) {
            return Err(Error::domain("refine_factor must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be positive"));
        }
        Ok(())
    }

    fn dt_near(&self, gap: f64) -> f64 {
        (gap * gap / self.refine_factor).clamp(self.dt_min, self.dt_max)
    }
}

/// The state of the BESQ vector the first time its sum reaches 1.
#[derive(Clone, Debug)]
pub struct ExitSample {
    pub exit_point: SimplexPoint,
    pub exit_time: f64,
    pub steps_used: usize,
}

pub(crate) struct ExitWalk {
    pub state: Vec<f64>,
    pub exit_time: f64,
    /// `4∫₀^{σ₁} ds/ζ(s)` accumulated by trapezoid; the market clock at exit.
    pub four_c: f64,
    pub steps: usize,
}

/// Relative step cap used whenever the time-change integral is accumulated:
/// `dt ≤ CLOCK_REL_STEP · ζ` keeps the per-step trapezoid error on `1/ζ`
/// well below the statistical tolerances downstream.
pub(crate) const CLOCK_REL_STEP: f64 = 0.005;

pub(crate) fn exit_walk(
    z0: &[f64],
    theta: &[f64],
    ctrl: &StepControl,
    track_clock: bool,
    rng: &mut RngStream,
) -> Result<ExitWalk> {
    ctrl.validate()?;
    let mut state = z0.to_vec();
    let mut zeta: f64 = state.iter().sum();
    let mut t = 0.0;
    let mut four_c = 0.0;
    let mut steps = 0usize;
    while zeta < 1.0 {
        if steps >= ctrl.max_steps {
            return Err(Error::StepBudget { used: steps, cap: ctrl.max_steps });
        }
        let mut dt = ctrl.dt_near(1.0 - zeta);
        if track_clock {
            dt = dt.min((CLOCK_REL_STEP * zeta).max(ctrl.dt_min));
        }
        let inv_old = 1.0 / zeta;
        let mut new_zeta = 0.0;
        for (c, &th) in state.iter_mut().zip(theta) {
            *c = transition_sample(*c, th, dt, rng);
            new_zeta += *c;
        }
        t += dt;
        if track_clock {
            four_c += 4.0 * dt * 0.5 * (inv_old + 1.0 / new_zeta);
        }
        zeta = new_zeta;
        steps += 1;
    }
    Ok(ExitWalk { state, exit_time: t, four_c, steps })
}

/// Samples the state of the vector process at `σ₁ = inf{t : Σ Zᵢ(t) ≥ 1}`,
/// radially renormalized onto the face `Σ = 1`.
///
/// Requires `θ₀ > 2` (which makes `σ₁` almost surely finite) and `Σ z0 < 1`.
pub fn sample_exit_state(
    z0: &QuadrantPoint,
    params: &ModelParams,
    ctrl: &StepControl,
    rng: &mut RngStream,
) -> Result<ExitSample> {
    params.require_transient()?;
    if z0.n() != params.n() {
        return Err(Error::Dimension("start dimension must match parameters".into()));
    }
    if z0.sum() >= 1.0 {
        return Err(Error::domain(format!("start must satisfy Σz < 1, got {}", z0.sum())));
    }
    let walk = exit_walk(z0.coords(), params.theta(), ctrl, false, rng)?;
    let zeta: f64 = walk.state.iter().sum();
    let exit_point = SimplexPoint::new(walk.state.iter().map(|c| c / zeta).collect())?;
    Ok(ExitSample { exit_point, exit_time: walk.exit_time, steps_used: walk.steps })
}

/// `P(σ_ε < σ₁)` for the sum process started at `Sx`, from the scale
/// function of a BESQ of dimension `θ₀ > 2`:
/// `(Sx^{1−θ₀/2} − 1) / (ε^{1−θ₀/2} − 1)`.
pub fn hitting_prob_between(sx: f64, eps: f64, theta0: f64) -> Result<f64> {
    if !(theta0 > 2.0) {
        return Err(Error::domain(format!("need θ₀ > 2, got {theta0}")));
    }
    if !(eps > 0.0 && eps < sx && sx < 1.0) {
        return Err(Error::domain(format!("need 0 < ε < Sx < 1, got ε={eps}, Sx={sx}")));
    }
    let p = 1.0 - 0.5 * theta0;
    Ok((sx.powf(p) - 1.0) / (eps.powf(p) - 1.0))
}

/// One-dimensional walk between two barriers; returns `true` if the lower
/// barrier is reached first. Steps adapt to the nearer barrier.
pub fn hits_lower_before_upper(
    x: f64,
    theta: f64,
    lower: f64,
    upper: f64,
    ctrl: &StepControl,
    rng: &mut RngStream,
) -> Result<bool> {
    ctrl.validate()?;
    if !(lower < x && x < upper) {
        return Err(Error::domain(format!("need lower < x < upper, got {lower}, {x}, {upper}")));
    }
    let mut z = x;
    let mut steps = 0usize;
    loop {
        if z <= lower {
            return Ok(true);
        }
        if z >= upper {
            return Ok(false);
        }
        if steps >= ctrl.max_steps {
            return Err(Error::StepBudget { used: steps, cap: ctrl.max_steps });
        }
        let gap = (z - lower).min(upper - z);
        let dt = ctrl.dt_near(gap);
        z = transition_sample(z, theta, dt, rng);
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn transition_moments_central_case() {
        // x = 0, θ = 2, t = 1: Gamma(1, scale 2), mean 2
        let mut rng = RngStream::new(3, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| transition_sample(0.0, 2.0, 1.0, &mut rng)).collect();
        let (mean, var) = mean_and_var(&xs);
        let se = (var / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn transition_moments_noncentral() {
        // x = 1, θ = 2, t = 0.5: mean x + θt = 2, var 2θt² + 4xt = 3
        let mut rng = RngStream::new(4, 0);
        let n = 1_000_000;
        let xs: Vec<f64> =
            (0..n).map(|_| transition_sample(1.0, 2.0, 0.5, &mut rng)).collect();
        let (mean, var) = mean_and_var(&xs);
        let se_mean = (var / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se_mean, "mean {mean}");
        // SE of the sample variance from the fourth central moment
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((m4 - var * var) / n as f64).sqrt();
        assert!((var - 3.0).abs() < 3.0 * se_var, "var {var}");
    }

    #[test]
    fn transitions_stay_nonnegative() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..10_000 {
            let v = transition_sample(0.01, 0.3, 0.07, &mut rng);
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn two_step_matches_one_step() {
        // chaining x -> t1 -> t2 agrees in law with one step x -> t2
        // (two-sample KS at the 1% level)
        let n = 100_000;
        let mut rng = RngStream::new(6, 0);
        let mut chained: Vec<f64> = (0..n)
            .map(|_| {
                let mid = transition_sample(0.7, 2.5, 0.4, &mut rng);
                transition_sample(mid, 2.5, 0.6, &mut rng)
            })
            .collect();
        let mut direct: Vec<f64> =
            (0..n).map(|_| transition_sample(0.7, 2.5, 1.0, &mut rng)).collect();
        chained.sort_by(|a, b| a.partial_cmp(b).unwrap());
        direct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // two-sample KS statistic by merge scan
        let mut i = 0;
        let mut j = 0;
        let mut d: f64 = 0.0;
        while i < n && j < n {
            if chained[i] <= direct[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
        }
        let crit = 1.6276 * (2.0 / n as f64).sqrt();
        assert!(d < crit, "KS {d} vs critical {crit}");
    }

    #[test]
    fn besq_scaling_property() {
        // a⁻¹·BESQ^θ_x(at) ~ BESQ^θ_{x/a}(t): compare first two moments
        let (a, x, th, t) = (3.0, 0.9, 1.7, 0.8);
        let n = 300_000;
        let mut rng = RngStream::new(7, 0);
        let scaled: Vec<f64> =
            (0..n).map(|_| transition_sample(x, th, a * t, &mut rng) / a).collect();
        let direct: Vec<f64> =
            (0..n).map(|_| transition_sample(x / a, th, t, &mut rng)).collect();
        let (m1, v1) = mean_and_var(&scaled);
        let (m2, v2) = mean_and_var(&direct);
        let se = ((v1 + v2) / n as f64).sqrt();
        assert!((m1 - m2).abs() < 3.0 * se, "means {m1} vs {m2}");
        assert!((v1 / v2 - 1.0).abs() < 0.05, "vars {v1} vs {v2}");
    }

    #[test]
    fn path_mean_grows_linearly() {
        let params = ModelParams::from_theta(vec![1.5]).unwrap();
        let x0 = QuadrantPoint::new(vec![0.4]).unwrap();
        let times = [0.0, 0.25, 0.5, 1.0];
        let n = 50_000;
        let mut terminal = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = RngStream::new(8, i as u64);
            let p = besq_path(&x0, &params, &times, &mut rng).unwrap();
            assert_eq!(p.state(0), &[0.4]);
            terminal.push(p.state(3)[0]);
        }
        let (mean, var) = mean_and_var(&terminal);
        let se = (var / n as f64).sqrt();
        assert!((mean - (0.4 + 1.5)).abs() < 3.0 * se);
    }

    #[test]
    fn additivity_of_coordinates() {
        // merging two coordinates matches a single BESQ of the summed dimension
        let params = ModelParams::from_theta(vec![1.0, 2.5]).unwrap();
        let x0 = QuadrantPoint::new(vec![0.2, 0.3]).unwrap();
        let times = [0.6];
        let n = 200_000;
        let mut merged = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = RngStream::new(9, i as u64);
            let p = besq_path(&x0, &params, &times, &mut rng).unwrap();
            merged.push(p.state(0)[0] + p.state(0)[1]);
        }
        let mut rng = RngStream::new(10, 0);
        let direct: Vec<f64> =
            (0..n).map(|_| transition_sample(0.5, 3.5, 0.6, &mut rng)).collect();
        let (m1, v1) = mean_and_var(&merged);
        let (m2, v2) = mean_and_var(&direct);
        let se = ((v1 + v2) / n as f64).sqrt();
        assert!((m1 - m2).abs() < 3.0 * se);
        assert!((v1 / v2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn exit_from_near_boundary_is_continuous() {
        // started 1e-9 inside the face, the exit point concentrates on the
        // renormalized start. Individual paths can wander before crossing
        // (the gap excursion lengths are heavy-tailed), so the statement is
        // distributional: tiny typical displacement, rare stragglers.
        let params = ModelParams::from_theta(vec![1.0, 2.0, 3.0]).unwrap();
        let base = [0.25, 0.35, 0.4 - 1e-9];
        let z0 = QuadrantPoint::new(base.to_vec()).unwrap();
        let ctrl = StepControl { dt_min: 1e-10, ..StepControl::default() };
        let total: f64 = base.iter().sum();
        let n = 2_000;
        let mut displacements = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = RngStream::new(11, i as u64);
            let s = sample_exit_state(&z0, &params, &ctrl, &mut rng).unwrap();
            let linf = s
                .exit_point
                .coords()
                .iter()
                .zip(&base)
                .map(|(c, b)| (c - b / total).abs())
                .fold(0.0f64, f64::max);
            displacements.push(linf);
        }
        let mean: f64 = displacements.iter().sum::<f64>() / n as f64;
        let beyond = displacements.iter().filter(|&&d| d > 1e-3).count();
        assert!(mean < 2e-4, "mean displacement {mean}");
        assert!(beyond <= n / 50, "{beyond} of {n} moved past 1e-3");
    }

    #[test]
    fn exit_is_exchangeable_under_symmetric_parameters() {
        let params = ModelParams::from_theta(vec![1.5, 1.5, 1.5]).unwrap();
        let z0 = QuadrantPoint::new(vec![1e-6, 1e-6, 1e-6]).unwrap();
        let ctrl = StepControl::default();
        let n = 30_000;
        let mut mean = [0.0f64; 3];
        for i in 0..n {
            let mut rng = RngStream::new(12, i as u64);
            let s = sample_exit_state(&z0, &params, &ctrl, &mut rng).unwrap();
            for (m, c) in mean.iter_mut().zip(s.exit_point.coords()) {
                *m += c / n as f64;
            }
        }
        // Dirichlet(3/4,...) coordinate sd ~ 0.26; 3σ of the mean
        let se = 0.26 / (n as f64).sqrt();
        for m in mean {
            assert!((m - 1.0 / 3.0).abs() < 3.0 * se, "mean {m}");
        }
    }

    #[test]
    fn scale_function_formula() {
        let p = hitting_prob_between(0.5, 0.1, 4.0).unwrap();
        assert!((p - 1.0 / 9.0).abs() < 1e-14);
        // started just above the lower level
        let p = hitting_prob_between(0.1 + 1e-12, 0.1, 4.0).unwrap();
        assert!((p - 1.0).abs() < 1e-9);
        // ε → 0 kills the probability (transience)
        let p = hitting_prob_between(0.5, 1e-9, 4.0).unwrap();
        assert!(p < 1e-8);
        assert!(hitting_prob_between(0.5, 0.6, 4.0).is_err());
        assert!(hitting_prob_between(0.5, 0.1, 2.0).is_err());
    }

    #[test]
    fn barrier_frequency_matches_scale_function() {
        // smoke-scale version of the full acceptance run
        let n = 10_000;
        let ctrl = StepControl::default();
        let mut hits = 0;
        for i in 0..n {
            let mut rng = RngStream::new(13, i as u64);
            if hits_lower_before_upper(0.5, 4.0, 0.1, 1.0, &ctrl, &mut rng).unwrap() {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let p = 1.0 / 9.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * se, "freq {freq}");
    }
}
