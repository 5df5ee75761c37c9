//! Wright-Fisher diffusions, the skew-product construction, and
//! volatility-stabilized market paths by time change.
//!
//! The BESQ vector `Z` factors as `Z(t) = ζ(t)·ν(4C_t)` with
//! `C_t = ∫₀ᵗ ds/ζ(s)`, where `ν` is a Wright-Fisher diffusion with
//! parameters `θᵢ/2` independent of the sum `ζ`. Running the same vector on
//! the inverse of `4τ_u = ∫₀ᵘ S(t)dt` instead gives the market model
//! `X(u) = Z(τ_u)`, whose total `S = ΣX` is geometric Brownian motion.
//! Both clocks are accumulated by trapezoid along exact BESQ steps and
//! inverted monotonically.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::besq::{self, StepControl};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::path::Path;
use crate::rng::RngStream;
use crate::simplex::{QuadrantPoint, SimplexPoint};

/// A monotone clock sampled on a grid: `integrated[i]` is the clock value
/// at `source_times[i]`, nondecreasing from zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeChange {
    source_times: Vec<f64>,
    integrated: Vec<f64>,
}

impl TimeChange {
    pub fn new(source_times: Vec<f64>, integrated: Vec<f64>) -> Result<Self> {
        if source_times.len() != integrated.len() || source_times.is_empty() {
            return Err(Error::Dimension("clock grids must be nonempty and equal length".into()));
        }
        if integrated[0] != 0.0 {
            return Err(Error::domain("clock must start at zero"));
        }
        for w in source_times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain("source times must be strictly increasing"));
            }
        }
        for w in integrated.windows(2) {
            if w[1] < w[0] {
                return Err(Error::domain("clock values must be nondecreasing"));
            }
        }
        Ok(TimeChange { source_times, integrated })
    }

    /// Builds `∫ f` by trapezoid from integrand samples on a grid.
    pub fn accumulate(times: &[f64], integrand: &[f64]) -> Result<Self> {
        if times.len() != integrand.len() || times.is_empty() {
            return Err(Error::Dimension("need matching nonempty grids".into()));
        }
        let mut acc = Vec::with_capacity(times.len());
        acc.push(0.0);
        for i in 1..times.len() {
            let dt = times[i] - times[i - 1];
            acc.push(acc[i - 1] + 0.5 * dt * (integrand[i] + integrand[i - 1]));
        }
        TimeChange::new(times.to_vec(), acc)
    }

    pub fn source_times(&self) -> &[f64] {
        &self.source_times
    }

    pub fn integrated(&self) -> &[f64] {
        &self.integrated
    }

    /// Clock value at `t`, linear between knots, clamped at the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let ts = &self.source_times;
        if t <= ts[0] {
            return self.integrated[0];
        }
        if t >= ts[ts.len() - 1] {
            return self.integrated[ts.len() - 1];
        }
        let i = ts.partition_point(|&x| x <= t) - 1;
        let frac = (t - ts[i]) / (ts[i + 1] - ts[i]);
        self.integrated[i] + frac * (self.integrated[i + 1] - self.integrated[i])
    }

    /// Source time at which the clock first reaches `u`; `None` when the
    /// sampled clock never gets there. Exact at grid knots, linear between.
    pub fn invert(&self, u: f64) -> Option<f64> {
        let last = *self.integrated.last().unwrap();
        if u > last {
            return None;
        }
        if u <= 0.0 {
            return Some(self.source_times[0]);
        }
        let i = self.integrated.partition_point(|&v| v < u);
        if i == 0 {
            return Some(self.source_times[0]);
        }
        let (u0, u1) = (self.integrated[i - 1], self.integrated[i]);
        let (t0, t1) = (self.source_times[i - 1], self.source_times[i]);
        if u1 == u0 {
            return Some(t1);
        }
        Some(t0 + (u - u0) / (u1 - u0) * (t1 - t0))
    }
}

/// Wright-Fisher diffusion with parameters `δ`:
/// `dJᵢ = ½(δᵢ − d·Jᵢ)dt + Σⱼ σ̃ᵢⱼ dβⱼ`,
/// `σ̃ᵢⱼ = √Jᵢ(1{i=j} − √(JᵢJⱼ))`, by Euler-Maruyama on the given grid,
/// clamping negative coordinates to zero and renormalizing each step.
pub fn wf_path(
    xi0: &SimplexPoint,
    delta: &[f64],
    times: &[f64],
    rng: &mut RngStream,
) -> Result<Path> {
    let n = xi0.n();
    if delta.len() != n {
        return Err(Error::Dimension("start and parameters must agree".into()));
    }
    for &d in delta {
        if !(d > 0.0) {
            return Err(Error::domain("Wright-Fisher parameters must be positive"));
        }
    }
    if times.is_empty() {
        return Err(Error::domain("time grid must be nonempty"));
    }
    let d: f64 = delta.iter().sum();
    let record = rng.record();
    let mut state = xi0.coords().to_vec();
    let mut states = Vec::with_capacity(times.len());
    states.push(state.clone());
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if !(dt > 0.0) {
            return Err(Error::domain("time grid must be strictly increasing"));
        }
        wf_euler_step(&mut state, delta, d, dt, rng);
        states.push(state.clone());
    }
    Path::new(times.to_vec(), states, record)
}

fn wf_euler_step<R: Rng + ?Sized>(state: &mut [f64], delta: &[f64], d: f64, dt: f64, rng: &mut R) {
    let sqdt = dt.sqrt();
    let noise: Vec<f64> = (0..state.len()).map(|_| rng.sample(StandardNormal)).collect();
    // (σ̃ ξ)ᵢ = √xᵢ ξᵢ − xᵢ Σⱼ √xⱼ ξⱼ
    let mixed: f64 = state.iter().zip(&noise).map(|(&x, &g)| x.sqrt() * g).sum();
    let mut sum = 0.0;
    for i in 0..state.len() {
        let x = state[i];
        let drift = 0.5 * (delta[i] - d * x) * dt;
        let diff = sqdt * (x.sqrt() * noise[i] - x * mixed);
        state[i] = (x + drift + diff).max(0.0);
        sum += state[i];
    }
    for x in state.iter_mut() {
        *x /= sum;
    }
}

/// Step policy for the time-changed constructions.
#[derive(Clone, Debug)]
pub struct SkewControl {
    /// BESQ step as a fraction of the current sum: `dt = rel_step · ζ`.
    /// The default keeps the trapezoid clock error well below Monte Carlo
    /// resolution; halving it moves marginal moments by far less than one
    /// standard error (see the refinement test).
    pub rel_step: f64,
    /// Output resolution of the Wright-Fisher clock grid.
    pub u_steps: usize,
    pub max_steps: usize,
}

impl Default for SkewControl {
    fn default() -> Self {
        SkewControl { rel_step: besq::CLOCK_REL_STEP, u_steps: 64, max_steps: 20_000_000 }
    }
}

impl SkewControl {
    fn validate(&self) -> Result<()> {
        if !(self.rel_step > 0.0 && self.rel_step < 1.0) {
            return Err(Error::domain("rel_step must lie in (0,1)"));
        }
        if self.u_steps == 0 || self.max_steps == 0 {
            return Err(Error::domain("u_steps and max_steps must be positive"));
        }
        Ok(())
    }
}

/// Output of the skew-product construction.
#[derive(Clone, Debug)]
pub struct SkewProduct {
    /// The angular part `ν(u) = Z/ζ (τ_u)` on an even grid of the
    /// Wright-Fisher clock `u = 4C_t`.
    pub weights: Path,
    /// The clock `4C_t` on the simulation grid.
    pub clock: TimeChange,
    /// The sum `ζ` on the simulation grid.
    pub zeta: Path,
}

/// Runs the BESQ vector and reads off the Wright-Fisher diffusion
/// `ν(u) = (Z/ζ)(τ_u)` on an even `u` grid up to `horizon`.
///
/// Each requested knot is hit by an exact BESQ transition over the
/// remaining sliver of the step, so no state interpolation smears the
/// marginals; the only approximation is the trapezoid clock itself.
pub fn skew_product_wf(
    z0: &QuadrantPoint,
    params: &ModelParams,
    horizon: f64,
    ctrl: &SkewControl,
    rng: &mut RngStream,
) -> Result<SkewProduct> {
    ctrl.validate()?;
    if z0.n() != params.n() {
        return Err(Error::Dimension("start dimension must match parameters".into()));
    }
    if !(z0.sum() > 0.0) {
        return Err(Error::domain("skew product requires Σz(0) > 0"));
    }
    if !(horizon > 0.0) {
        return Err(Error::domain("horizon must be positive"));
    }
    let record = rng.record();
    let du = horizon / ctrl.u_steps as f64;
    let knots: Vec<f64> = (0..=ctrl.u_steps).map(|k| k as f64 * du).collect();

    let mut walker = ClockWalker::new(z0.coords().to_vec(), params.theta().to_vec(), ctrl);
    let mut weight_states = Vec::with_capacity(knots.len());
    weight_states.push(walker.weights());
    for &u in &knots[1..] {
        walker.advance_to_clock(u, rng)?;
        weight_states.push(walker.weights());
    }
    let weights = Path::new(knots, weight_states, record)?;
    let clock = TimeChange::new(walker.times.clone(), walker.clock_values.clone())?;
    let zeta = Path::new(
        walker.times.clone(),
        walker.zeta_values.iter().map(|&z| vec![z]).collect(),
        record,
    )?;
    Ok(SkewProduct { weights, clock, zeta })
}

/// Lean variant for Monte Carlo: the angular marginal at one clock time `u`
/// together with the sum `ζ(τ_u)`.
pub fn skew_marginal(
    z0: &QuadrantPoint,
    params: &ModelParams,
    u: f64,
    ctrl: &SkewControl,
    rng: &mut RngStream,
) -> Result<(SimplexPoint, f64)> {
    ctrl.validate()?;
    if !(z0.sum() > 0.0) {
        return Err(Error::domain("skew product requires Σz(0) > 0"));
    }
    let mut walker = ClockWalker::new(z0.coords().to_vec(), params.theta().to_vec(), ctrl);
    walker.advance_to_clock(u, rng)?;
    let zeta = walker.zeta();
    Ok((SimplexPoint::new(walker.weights())?, zeta))
}

/// BESQ vector driven forward with the clock `4C_t = 4∫ds/ζ` accumulated by
/// trapezoid; steps land exactly on requested clock knots.
struct ClockWalker {
    state: Vec<f64>,
    theta: Vec<f64>,
    t: f64,
    four_c: f64,
    steps: usize,
    rel_step: f64,
    max_steps: usize,
    record_grid: bool,
    times: Vec<f64>,
    clock_values: Vec<f64>,
    zeta_values: Vec<f64>,
}

impl ClockWalker {
    fn new(state: Vec<f64>, theta: Vec<f64>, ctrl: &SkewControl) -> Self {
        let zeta: f64 = state.iter().sum();
        ClockWalker {
            state,
            theta,
            t: 0.0,
            four_c: 0.0,
            steps: 0,
            rel_step: ctrl.rel_step,
            max_steps: ctrl.max_steps,
            record_grid: true,
            times: vec![0.0],
            clock_values: vec![0.0],
            zeta_values: vec![zeta],
        }
    }

    fn zeta(&self) -> f64 {
        self.state.iter().sum()
    }

    fn weights(&self) -> Vec<f64> {
        let z = self.zeta();
        self.state.iter().map(|&c| c / z).collect()
    }

    fn advance_to_clock(&mut self, target: f64, rng: &mut RngStream) -> Result<()> {
        while self.four_c < target {
            if self.steps >= self.max_steps {
                return Err(Error::StepBudget { used: self.steps, cap: self.max_steps });
            }
            let zeta = self.zeta();
            if zeta <= 1e-12 {
                return Err(Error::HorizonUnreachable(format!(
                    "sum process vanished before the clock reached {target}"
                )));
            }
            let mut dt = self.rel_step * zeta;
            // left-slope estimate of the step needed to land on the knot
            let dt_to_knot = (target - self.four_c) * zeta / 4.0;
            let landing = dt_to_knot <= dt;
            if landing {
                dt = dt_to_knot;
            }
            if dt <= 0.0 {
                break;
            }
            let inv_old = 1.0 / zeta;
            let mut new_zeta = 0.0;
            for (c, &th) in self.state.iter_mut().zip(&self.theta) {
                *c = besq::transition_sample(*c, th, dt, rng);
                new_zeta += *c;
            }
            self.t += dt;
            self.four_c += 4.0 * dt * 0.5 * (inv_old + 1.0 / new_zeta);
            self.steps += 1;
            if self.record_grid {
                self.times.push(self.t);
                self.clock_values.push(self.four_c);
                self.zeta_values.push(new_zeta);
            }
            if landing {
                // trapezoid correction leaves an O(dt²) sliver; close enough
                // to call this the knot
                break;
            }
        }
        Ok(())
    }
}

/// Volatility-stabilized market path `X(u) = Z(τ_u)` with `θ = 2δ`, on the
/// requested market-time grid. The sum `ΣX` is geometric Brownian motion
/// with log-drift `(d−1)/2`.
pub fn vsm_path(
    x0: &QuadrantPoint,
    delta: &[f64],
    times: &[f64],
    ctrl: &SkewControl,
    rng: &mut RngStream,
) -> Result<Path> {
    ctrl.validate()?;
    let params = ModelParams::from_delta(delta)?;
    params.require_transient()?;
    if x0.n() != params.n() {
        return Err(Error::Dimension("start dimension must match parameters".into()));
    }
    if !(x0.sum() > 0.0) {
        return Err(Error::domain("market must start with positive total"));
    }
    if times.is_empty() {
        return Err(Error::domain("time grid must be nonempty"));
    }
    if times[0] < 0.0 {
        return Err(Error::domain("time grid must be nonnegative"));
    }
    let record = rng.record();
    let mut walker = ClockWalker::new(x0.coords().to_vec(), params.theta().to_vec(), ctrl);
    walker.record_grid = false;
    let mut states = Vec::with_capacity(times.len());
    for &u in times {
        walker.advance_to_clock(u, rng)?;
        states.push(walker.state.clone());
    }
    Path::new(times.to_vec(), states, record)
}

/// First time the total market hits `a` from `s0 < a`: simulates the sum
/// `ζ ~ BESQ(2d)` to its exit and returns the accumulated market clock
/// `4∫ds/ζ`. Requires `d > 1` so the hit is almost surely finite.
pub fn vsm_hitting_time(
    s0: f64,
    a: f64,
    d: f64,
    ctrl: &StepControl,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(d > 1.0) {
        return Err(Error::domain(format!("need d > 1 for a finite hit, got {d}")));
    }
    if !(s0 > 0.0 && a > 0.0) {
        return Err(Error::domain("levels must be positive"));
    }
    if s0 >= a {
        return Ok(0.0);
    }
    // scale invariance: only a/s₀ matters
    let walk = besq::exit_walk(&[s0 / a], &[2.0 * d], ctrl, true, rng)?;
    Ok(walk.four_c)
}

/// Weights within a subset of coordinates: `μ̃ᵢ = Xᵢ / Σ_{j∈subset} Xⱼ`.
pub fn submarket_weights(path: &Path, subset: &[usize]) -> Result<Path> {
    if subset.is_empty() {
        return Err(Error::domain("subset must be nonempty"));
    }
    let dim = path.dim();
    for &i in subset {
        if i >= dim {
            return Err(Error::Dimension(format!("index {i} out of range for dimension {dim}")));
        }
    }
    let mut states = Vec::with_capacity(path.len());
    for (idx, state) in path.states().iter().enumerate() {
        let total: f64 = subset.iter().map(|&i| state[i]).sum();
        if !(total > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateSubsum(idx));
        }
        states.push(subset.iter().map(|&i| state[i] / total).collect());
    }
    Path::new(path.times().to_vec(), states, path.seed_record())
}

/// Monte Carlo mean of `(1/log u)∫₀ᵘ ds/ζ(s)` for a BESQ sum of dimension
/// `d > 2`, which converges to `1/(d−2)` as `u → ∞`.
///
/// The start level `ζ(0) = 2·exp(ψ(d/2))` makes the finite-`u` mean equal
/// to the limit up to `O(1/u)`: the `O(1/log u)` transient of the expected
/// integral cancels exactly at that level.
pub fn timechange_growth_statistic(
    params: &ModelParams,
    u: f64,
    rng: &mut RngStream,
    n_paths: usize,
) -> Result<f64> {
    let d = params.d();
    if !(d > 2.0) {
        return Err(Error::domain(format!("statistic requires d > 2 (θ₀ > 4), got d = {d}")));
    }
    if !(u > 1.0) {
        return Err(Error::domain("horizon must exceed 1"));
    }
    if n_paths == 0 {
        return Err(Error::domain("need at least one path"));
    }
    let start = 2.0 * statrs::function::gamma::digamma(0.5 * d).exp();
    let log_u = u.ln();
    let mut total = 0.0;
    for _ in 0..n_paths {
        let mut zeta = start;
        let mut s = 0.0;
        let mut c = 0.0;
        while s < u {
            let dt = (besq::CLOCK_REL_STEP * zeta).min(u - s);
            let inv_old = 1.0 / zeta;
            zeta = besq::transition_sample(zeta, d, dt, rng);
            c += dt * 0.5 * (inv_old + 1.0 / zeta);
            s += dt;
        }
        total += c / log_u;
    }
    Ok(total / n_paths as f64)
}

/// State along a path at an off-grid time, linear between knots.
pub fn interpolate_state(path: &Path, t: f64) -> Vec<f64> {
    let ts = path.times();
    if t <= ts[0] {
        return path.state(0).to_vec();
    }
    if t >= ts[ts.len() - 1] {
        return path.state(ts.len() - 1).to_vec();
    }
    let i = ts.partition_point(|&x| x <= t) - 1;
    let frac = (t - ts[i]) / (ts[i + 1] - ts[i]);
    path.state(i)
        .iter()
        .zip(path.state(i + 1))
        .map(|(&a, &b)| a + frac * (b - a))
        .collect()
}
