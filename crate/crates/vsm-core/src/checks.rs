//! Named verification suites.
//!
//! Each check runs one cross-validation — closed form against quadrature,
//! Monte Carlo against closed form, or two samplers against each other —
//! and returns a [`VerificationReport`]. The CLI `verify` subcommands and
//! the acceptance suite both call these.

use std::collections::BTreeMap;

use serde_json::json;

use crate::besq::{self, StepControl};
use crate::density::ExitDensityEvaluator;
use crate::diffusion::{self, TimeChange};
use crate::dirichlet::dirichlet_sample;
use crate::error::{Error, Result};
use crate::green;
use crate::mc::par_paths;
use crate::params::ModelParams;
use crate::rng::RngStream;
use crate::series::SeriesControl;
use crate::simplex::{QuadrantPoint, SimplexPoint};
use crate::transition::{self, InversionControl, TransitionDensityEvaluator};
use crate::verify::{
    binned_tv_distance, simplex_quadrature, Direction, SimplexGrid, VerificationReport,
};

fn meta(entries: &[(&str, serde_json::Value)]) -> BTreeMap<String, serde_json::Value> {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Quadrature mass of the exit density: `∫ φ_z = 1` within `tol`.
pub fn normalization_check(
    theta: &[f64],
    z: &[f64],
    resolution: usize,
    tol: f64,
    ctrl: &SeriesControl,
) -> Result<VerificationReport> {
    let params = ModelParams::from_theta(theta.to_vec())?;
    let start = QuadrantPoint::new(z.to_vec())?;
    let evaluator = ExitDensityEvaluator::new(&start, &params, ctrl)?;
    let grid = SimplexGrid::new(params.n(), resolution)?;
    let quad = simplex_quadrature(|y| evaluator.eval(y), &grid, Some(&params.nu()))?;
    Ok(VerificationReport::new(
        "normalization",
        (quad.value - 1.0).abs(),
        tol,
        Direction::Le,
        0,
        0,
        meta(&[
            ("theta", json!(theta)),
            ("z", json!(z)),
            ("resolution", json!(resolution)),
            ("mass", json!(quad.value)),
            ("error_indicator", json!(quad.error_indicator)),
            ("mixture_terms", json!(evaluator.terms())),
        ]),
    ))
}

/// A point uniform in the open simplex `Σ < scale`, kept away from faces.
fn interior_point(rng: &mut RngStream, n: usize, scale: f64, margin: f64) -> Vec<f64> {
    loop {
        // uniform on {Σ ≤ scale} via an (n+1)-component Dirichlet(1,…,1)
        let p = dirichlet_sample(&vec![1.0; n + 1], rng).expect("valid parameters");
        let c: Vec<f64> = p.coords()[..n].iter().map(|&v| v * scale).collect();
        let s: f64 = c.iter().sum();
        if c.iter().all(|&v| v > margin) && s < scale - margin && s > margin {
            return c;
        }
    }
}

/// Green-kernel symmetry `v(x,y)ω(x) = v(y,x)ω(y)` over random interior
/// pairs; the statistic is the worst relative asymmetry.
pub fn symmetry_check(
    theta: &[f64],
    n_pairs: usize,
    seed: u64,
    tol: f64,
    ctrl: &SeriesControl,
) -> Result<VerificationReport> {
    let params = ModelParams::from_theta(theta.to_vec())?;
    let weight = green::WeightFn::new(params.clone());
    let mut rng = RngStream::new(seed, 0);
    let mut worst = 0.0f64;
    let mut redrawn = 0usize;
    for _ in 0..n_pairs {
        // pairs on the diagonal x ≈ y sit near the kernel pole, where the
        // series ratio approaches 1 and the term count explodes; redraw
        // those, like the near-pole exclusion in the harmonicity check
        let (x, y) = loop {
            let x = QuadrantPoint::new(interior_point(&mut rng, params.n(), 1.0, 1e-3))?;
            let y = QuadrantPoint::new(interior_point(&mut rng, params.n(), 1.0, 1e-3))?;
            let root_sum: f64 = x
                .coords()
                .iter()
                .zip(y.coords())
                .map(|(&a, &b)| (a * b).sqrt())
                .sum();
            let ratio = (2.0 * root_sum / (x.sum() + y.sum())).powi(2);
            if ratio <= 0.98 {
                break (x, y);
            }
            redrawn += 1;
        };
        let vxy = green::green_kernel_v(&x, &y, &params, ctrl)?;
        let vyx = green::green_kernel_v(&y, &x, &params, ctrl)?;
        let lhs = vxy * weight.eval(x.coords());
        let rhs = vyx * weight.eval(y.coords());
        worst = worst.max((lhs - rhs).abs() / lhs.abs());
    }
    Ok(VerificationReport::new(
        "symmetry",
        worst,
        tol,
        Direction::Le,
        n_pairs as u64,
        seed,
        meta(&[("theta", json!(theta)), ("near_pole_redraws", json!(redrawn))]),
    ))
}

/// Finite-difference harmonicity of the Kelvin transform of the potential
/// kernel inside the simplex.
///
/// At each point the residual `𝓛K[u_y]` must stay below
/// `10h²·(term scale) + 256ε·(FD magnitude)` — the first part is the
/// second-order truncation allowance, the second the rounding floor of the
/// difference quotients — both at `h` and at `h/2` (the Richardson
/// confirmation). The statistic is the worst residual-to-tolerance ratio.
pub fn harmonicity_check(
    theta: &[f64],
    pole: &[f64],
    n_points: usize,
    h: f64,
    seed: u64,
    ctrl: &SeriesControl,
) -> Result<VerificationReport> {
    let params = ModelParams::from_theta(theta.to_vec())?;
    let y = QuadrantPoint::new(pole.to_vec())?;
    if y.sum() >= 1.0 {
        return Err(Error::domain("pole must lie inside the simplex"));
    }
    let kelvin_u = |pt: &[f64]| {
        let q = QuadrantPoint::new(pt.to_vec())?;
        green::kelvin_transform(
            |inv| green::potential_kernel_u(inv, &y, &params, ctrl),
            &q,
            &params,
        )
    };
    let mut rng = RngStream::new(seed, 0);
    let mut worst = 0.0f64;
    let mut used = 0usize;
    while used < n_points {
        let z = interior_point(&mut rng, params.n(), 1.0, 1e-2);
        let dist: f64 = z
            .iter()
            .zip(pole)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist <= 1e-2 {
            continue;
        }
        for step in [h, 0.5 * h] {
            let g = green::apply_generator_fd_detailed(kelvin_u, &z, &params, step)?;
            let tol = 10.0 * step * step * g.term_scale + 256.0 * f64::EPSILON * g.fd_magnitude;
            worst = worst.max(g.value.abs() / tol);
        }
        used += 1;
    }
    Ok(VerificationReport::new(
        "harmonicity",
        worst,
        1.0,
        Direction::Le,
        n_points as u64,
        seed,
        meta(&[("theta", json!(theta)), ("pole", json!(pole)), ("h", json!(h))]),
    ))
}

/// Binned total variation between sampled exit states and the closed-form
/// exit density.
pub fn mc_exit_check(
    theta: &[f64],
    z: &[f64],
    n_paths: usize,
    resolution: usize,
    tol: f64,
    seed: u64,
    workers: usize,
    ctrl: &SeriesControl,
    step: &StepControl,
) -> Result<VerificationReport> {
    let params = ModelParams::from_theta(theta.to_vec())?;
    let start = QuadrantPoint::new(z.to_vec())?;
    let samples: Vec<SimplexPoint> = par_paths(n_paths, workers, seed, |rng| {
        besq::sample_exit_state(&start, &params, step, rng)
            .map(|s| s.exit_point)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let evaluator = ExitDensityEvaluator::new(&start, &params, ctrl)?;
    let grid = SimplexGrid::new(params.n(), resolution)?;
    let tv = binned_tv_distance(&samples, |y| evaluator.eval(y), &grid, Some(&params.nu()))?;
    Ok(VerificationReport::new(
        "mc-exit",
        tv,
        tol,
        Direction::Le,
        n_paths as u64,
        seed,
        meta(&[
            ("theta", json!(theta)),
            ("z", json!(z)),
            ("resolution", json!(resolution)),
            ("workers", json!(workers)),
        ]),
    ))
}

/// Wright-Fisher occupation moments over a late window against the
/// Dirichlet invariant law; the statistic is the worst standardized
/// deviation across first and second moments.
pub fn stationarity_check(
    delta: &[f64],
    t_burn: f64,
    t_max: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
    workers: usize,
) -> Result<VerificationReport> {
    if !(t_burn < t_max && t_burn > 0.0 && dt > 0.0) {
        return Err(Error::domain("need 0 < t_burn < t_max and dt > 0"));
    }
    let n = delta.len();
    let steps = (t_max / dt).ceil() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let xi0 = SimplexPoint::new(vec![1.0 / n as f64; n])?;
    let dtotal: f64 = delta.iter().sum();

    // per-path occupation averages of Jᵢ and Jᵢ² over [t_burn, t_max]
    let delta_own = delta.to_vec();
    let per_path: Vec<Vec<f64>> = par_paths(n_paths, workers, seed, move |rng| {
        let path = diffusion::wf_path(&xi0, &delta_own, &times, rng).expect("wf path");
        let from = times.partition_point(|&t| t < t_burn);
        let count = (path.len() - from) as f64;
        let mut acc = vec![0.0; 2 * n];
        for state in &path.states()[from..] {
            for i in 0..n {
                acc[i] += state[i] / count;
                acc[n + i] += state[i] * state[i] / count;
            }
        }
        acc
    });
    let mut worst = 0.0f64;
    let mut metadata = meta(&[("delta", json!(delta)), ("window", json!([t_burn, t_max]))]);
    for j in 0..2 * n {
        let mean: f64 = per_path.iter().map(|p| p[j]).sum::<f64>() / n_paths as f64;
        let var: f64 = per_path.iter().map(|p| (p[j] - mean) * (p[j] - mean)).sum::<f64>()
            / (n_paths - 1) as f64;
        let se = (var / n_paths as f64).sqrt().max(f64::MIN_POSITIVE);
        let i = j % n;
        let analytic = if j < n {
            delta[i] / dtotal
        } else {
            delta[i] * (delta[i] + 1.0) / (dtotal * (dtotal + 1.0))
        };
        let z = (mean - analytic) / se;
        worst = worst.max(z.abs());
        let name = if j < n { format!("mean_{i}") } else { format!("second_{i}") };
        metadata.insert(name, json!({"sample": mean, "analytic": analytic, "z": z}));
    }
    Ok(VerificationReport::new(
        "stationarity",
        worst,
        3.0,
        Direction::Le,
        n_paths as u64,
        seed,
        metadata,
    ))
}

/// Dirichlet sampler moments against the analytic mean and second moment.
pub fn moments_check(gamma: &[f64], n_samples: usize, seed: u64) -> Result<VerificationReport> {
    let total: f64 = gamma.iter().sum();
    let mut rng = RngStream::new(seed, 0);
    let n = gamma.len();
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        samples.push(dirichlet_sample(gamma, &mut rng)?.coords().to_vec());
    }
    let mut worst = 0.0f64;
    let mut metadata = meta(&[("gamma", json!(gamma))]);
    for i in 0..n {
        for (order, analytic) in [
            (1, gamma[i] / total),
            (2, gamma[i] * (gamma[i] + 1.0) / (total * (total + 1.0))),
        ] {
            let vals: Vec<f64> = samples.iter().map(|s| s[i].powi(order)).collect();
            let mean: f64 = vals.iter().sum::<f64>() / n_samples as f64;
            let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n_samples - 1) as f64;
            let se = (var / n_samples as f64).sqrt().max(f64::MIN_POSITIVE);
            let z = (mean - analytic) / se;
            worst = worst.max(z.abs());
            metadata.insert(format!("coord{i}_order{order}"), json!({"z": z}));
        }
    }
    Ok(VerificationReport::new(
        "moments",
        worst,
        3.0,
        Direction::Le,
        n_samples as u64,
        seed,
        metadata,
    ))
}

/// Growth of the additive clock `(1/log u)∫₀ᵘ ds/ζ(s)` against its limit
/// `1/(d−2)`; the statistic is the relative deviation of the Monte Carlo
/// mean.
pub fn timechange_check(
    d: f64,
    u: f64,
    n_paths: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let params = ModelParams::from_delta(&[d])?;
    let mut rng = RngStream::new(seed, 0);
    let stat = diffusion::timechange_growth_statistic(&params, u, &mut rng, n_paths)?;
    let limit = 1.0 / (d - 2.0);
    Ok(VerificationReport::new(
        "timechange",
        (stat - limit).abs() / limit,
        tol,
        Direction::Le,
        n_paths as u64,
        seed,
        meta(&[
            ("d", json!(d)),
            ("u", json!(u)),
            ("statistic_raw", json!(stat)),
            ("limit", json!(limit)),
        ]),
    ))
}

/// Binned TV between Euler Wright-Fisher marginals at `t` and the
/// Laplace-inverted transition density.
pub fn transition_mc_check(
    delta: &[f64],
    xi: &[f64],
    t: f64,
    dt: f64,
    n_paths: usize,
    resolution: usize,
    tol: f64,
    seed: u64,
    workers: usize,
    ctrl: &SeriesControl,
    inv: &InversionControl,
) -> Result<VerificationReport> {
    let xi0 = SimplexPoint::new(xi.to_vec())?;
    let steps = (t / dt).ceil() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * t / steps as f64).collect();
    let delta_own = delta.to_vec();
    let xi_run = xi0.clone();
    let samples: Vec<SimplexPoint> = par_paths(n_paths, workers, seed, move |rng| {
        let p = diffusion::wf_path(&xi_run, &delta_own, &times, rng).expect("wf path");
        SimplexPoint::new(p.state(p.len() - 1).to_vec()).expect("simplex state")
    });
    let evaluator = TransitionDensityEvaluator::new(t, &xi0, delta, ctrl, inv)?;
    let grid = SimplexGrid::new(delta.len(), resolution)?;
    let exps: Vec<f64> = delta.iter().map(|&d| d - 1.0).collect();
    let tv = binned_tv_distance(&samples, |y| evaluator.eval(y), &grid, Some(&exps))?;
    Ok(VerificationReport::new(
        "transition-mc",
        tv,
        tol,
        Direction::Le,
        n_paths as u64,
        seed,
        meta(&[
            ("delta", json!(delta)),
            ("xi", json!(xi)),
            ("t", json!(t)),
            ("dt", json!(dt)),
            ("resolution", json!(resolution)),
            ("mass_defect", json!(evaluator.mass_defect())),
        ]),
    ))
}

/// Forward-transform round trip of the inverted mixture coefficients
/// against the closed-form right side, across dimensions, orders, and
/// transform arguments. The statistic is the worst relative error.
pub fn laplace_roundtrip_check(
    ds: &[f64],
    rhos: &[f64],
    m_max: usize,
    tol: f64,
    inv: &InversionControl,
) -> Result<VerificationReport> {
    let mut worst = 0.0f64;
    let mut at = (0.0, 0usize, 0.0);
    for &d in ds {
        for m in 0..=m_max {
            for &rho in rhos {
                let err = transition::bm_roundtrip_error(d, m, rho, inv)?;
                if err > worst {
                    worst = err;
                    at = (d, m, rho);
                }
            }
        }
    }
    Ok(VerificationReport::new(
        "laplace-roundtrip",
        worst,
        tol,
        Direction::Le,
        (ds.len() * rhos.len() * (m_max + 1)) as u64,
        0,
        meta(&[
            ("ds", json!(ds)),
            ("rhos", json!(rhos)),
            ("m_max", json!(m_max)),
            ("worst_at", json!({"d": at.0, "m": at.1, "rho": at.2})),
        ]),
    ))
}

/// Sub-market weights, reclocked by `∫ds/(1−J₁)`, against the analytic
/// transient moments of the reduced Wright-Fisher diffusion.
pub fn submarket_check(
    delta: &[f64],
    xi: &[f64],
    u: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
    workers: usize,
) -> Result<VerificationReport> {
    if delta.len() != 3 || xi.len() != 3 {
        return Err(Error::Dimension("submarket check runs the 2-of-3 reduction".into()));
    }
    let xi0 = SimplexPoint::new(xi.to_vec())?;
    let steps = (u / dt).ceil() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * u / steps as f64).collect();
    let delta_own = delta.to_vec();

    // the clock integrand 1/(1−J₁) is ≥ 1, so the clock reaches u by time u
    let reclocked: Vec<f64> = par_paths(n_paths, workers, seed, move |rng| {
        let p = diffusion::wf_path(&xi0, &delta_own, &times, rng).expect("wf path");
        let integrand: Vec<f64> =
            p.states().iter().map(|s| 1.0 / (1.0 - s[0]).max(1e-12)).collect();
        let clock = TimeChange::accumulate(p.times(), &integrand).expect("clock");
        let t_star = clock.invert(u).expect("clock reaches u by construction");
        let state = diffusion::interpolate_state(&p, t_star);
        state[1] / (1.0 - state[0]).max(1e-12)
    });

    // analytic transient moments of the first coordinate of WF(δ₂, δ₃)
    let (a, dsub) = (delta[1], delta[1] + delta[2]);
    let y0 = xi[1] / (1.0 - xi[0]);
    let mean_inf = a / dsub;
    let c1 = y0 - mean_inf;
    let m1 = mean_inf + c1 * (-0.5 * dsub * u).exp();
    // E[Y²] solves E₂' = (a+1)E₁ − (d'+1)E₂ with E₁ as above
    let e2_inf = (a + 1.0) / (dsub + 1.0) * mean_inf;
    let b2 = (a + 1.0) * c1 / (0.5 * dsub + 1.0);
    let a2 = y0 * y0 - e2_inf - b2;
    let m2 = e2_inf + a2 * (-(dsub + 1.0) * u).exp() + b2 * (-0.5 * dsub * u).exp();

    let mut worst = 0.0f64;
    let mut metadata = meta(&[("delta", json!(delta)), ("xi", json!(xi)), ("u", json!(u))]);
    for (order, analytic) in [(1, m1), (2, m2)] {
        let vals: Vec<f64> = reclocked.iter().map(|&v| v.powi(order)).collect();
        let mean: f64 = vals.iter().sum::<f64>() / n_paths as f64;
        let var: f64 =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_paths - 1) as f64;
        let se = (var / n_paths as f64).sqrt().max(f64::MIN_POSITIVE);
        let z = (mean - analytic) / se;
        worst = worst.max(z.abs());
        metadata
            .insert(format!("order_{order}"), json!({"sample": mean, "analytic": analytic, "z": z}));
    }
    Ok(VerificationReport::new(
        "submarket",
        worst,
        3.0,
        Direction::Le,
        n_paths as u64,
        seed,
        metadata,
    ))
}
