//! Goodness-of-fit statistics: binned total variation on the simplex,
//! Kolmogorov-Smirnov, moment tests, and chi-square.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;
use crate::verify::gauss_jacobi_01;
use crate::verify::grid::SimplexGrid;
use crate::verify::report::{Direction, VerificationReport};

const MIN_TV_SAMPLES: usize = 1_000;
const CELL_NODES: usize = 16;

/// Integrates `density` over one grid cell.
///
/// Cells with an edge on a face where the declared exponent is negative are
/// oriented so the Gauss-Jacobi weight absorbs the singularity.
fn cell_mass<F>(
    density: &F,
    grid: &SimplexGrid,
    idx: usize,
    exps: &[f64],
) -> Result<f64>
where
    F: Fn(&SimplexPoint) -> Result<f64>,
{
    let verts = grid.cell_vertices(idx)?;
    match grid.n() {
        2 => {
            let (l, r) = (verts[0][0], verts[1][0]);
            let a = if l == 0.0 { exps[0] } else { 0.0 };
            let b = if r == 1.0 { exps[1] } else { 0.0 };
            let (nodes, weights) = gauss_jacobi_01(CELL_NODES, a, b)?;
            // y₁ = l + (r−l)t; on singular ends the weight factor is
            // (r−l)^a t^a resp. (1−l)^b (1−t)^b
            let mut scale = r - l;
            if l == 0.0 {
                scale *= (r - l).powf(exps[0]);
            }
            if r == 1.0 {
                scale *= (1.0 - l).powf(exps[1]);
            }
            let mut acc = 0.0;
            for (&t, &w) in nodes.iter().zip(&weights) {
                let y1 = l + (r - l) * t;
                let y = SimplexPoint::from_chart(&[y1])?;
                let mut g = density(&y)?;
                if l == 0.0 && exps[0] != 0.0 {
                    g *= y1.powf(-exps[0]);
                }
                if r == 1.0 && exps[1] != 0.0 {
                    g *= (1.0 - y1).powf(-exps[1]);
                }
                acc += w * g;
            }
            Ok(acc * scale)
        }
        3 => {
            // the three faces in chart coordinates: u₁=0, u₂=0, u₁+u₂=1
            let face_value = |v: &[f64], face: usize| -> f64 {
                match face {
                    0 => v[0],
                    1 => v[1],
                    _ => 1.0 - v[0] - v[1],
                }
            };
            // find a singular face carried by a whole edge (two vertices)
            let mut singular: Option<(usize, f64)> = None;
            for face in 0..3 {
                if exps[face] >= 0.0 {
                    continue;
                }
                let on_face =
                    verts.iter().filter(|v| face_value(v, face).abs() < 1e-12).count();
                if on_face == 2 {
                    match singular {
                        Some((_, nu)) if nu <= exps[face] => {}
                        _ => singular = Some((face, exps[face])),
                    }
                }
            }
            // orient: V0, V1 on the singular face (if any), V2 opposite
            let mut order = [0usize, 1, 2];
            if let Some((face, _)) = singular {
                order.sort_by(|&a, &b| {
                    let fa = face_value(&verts[a], face).abs();
                    let fb = face_value(&verts[b], face).abs();
                    fa.partial_cmp(&fb).unwrap()
                });
            }
            let v0 = &verts[order[0]];
            let v1 = &verts[order[1]];
            let v2 = &verts[order[2]];
            let nu = singular.map(|(_, nu)| nu).unwrap_or(0.0);
            let face = singular.map(|(f, _)| f);

            let det = ((v1[0] - v0[0]) * (v2[1] - v0[1])
                - (v2[0] - v0[0]) * (v1[1] - v0[1]))
                .abs();
            // y(u,w) = V0 + u(V1−V0) + (1−u)w(V2−V0); |J| = det·(1−u);
            // on the singular face L(y) = (1−u)·w·L(V2)
            let (un, uw) = gauss_jacobi_01(CELL_NODES, 0.0, nu + 1.0)?;
            let (wn, ww) = gauss_jacobi_01(CELL_NODES, nu, 0.0)?;
            let lv2 = face.map(|f| face_value(v2, f)).unwrap_or(1.0);
            let mut acc = 0.0;
            for (&u, &wu) in un.iter().zip(&uw) {
                for (&w, &wwt) in wn.iter().zip(&ww) {
                    let c1 = v0[0] + u * (v1[0] - v0[0]) + (1.0 - u) * w * (v2[0] - v0[0]);
                    let c2 = v0[1] + u * (v1[1] - v0[1]) + (1.0 - u) * w * (v2[1] - v0[1]);
                    let y = SimplexPoint::from_chart(&[c1, c2])?;
                    let mut g = density(&y)?;
                    if let Some(f) = face {
                        let l = face_value(&[c1, c2], f);
                        g *= l.powf(-nu);
                    }
                    acc += wu * wwt * g;
                }
            }
            Ok(acc * det * lv2.powf(nu))
        }
        _ => Err(Error::Dimension("cell quadrature is implemented for n <= 3".into())),
    }
}

/// Binned total-variation distance `½ Σ_cells |freq − ∫_cell density|`
/// between an empirical sample and a density on the face.
///
/// `singularity_exponents` plays the same role as in
/// [`crate::verify::simplex_quadrature`]. Requires at least 1000 samples.
pub fn binned_tv_distance<F>(
    samples: &[SimplexPoint],
    density: F,
    bins: &SimplexGrid,
    singularity_exponents: Option<&[f64]>,
) -> Result<f64>
where
    F: Fn(&SimplexPoint) -> Result<f64> + Sync,
{
    if samples.len() < MIN_TV_SAMPLES {
        return Err(Error::InsufficientSamples { need: MIN_TV_SAMPLES, got: samples.len() });
    }
    let zeros = vec![0.0; bins.n()];
    let exps = match singularity_exponents {
        Some(e) => {
            if e.len() != bins.n() {
                return Err(Error::Dimension("exponent vector must have length n".into()));
            }
            e
        }
        None => &zeros,
    };
    let mut counts = vec![0u64; bins.cell_count()];
    for s in samples {
        counts[bins.locate(s)?] += 1;
    }
    let masses: Result<Vec<f64>> = (0..bins.cell_count())
        .into_par_iter()
        .map(|idx| cell_mass(&density, bins, idx, exps))
        .collect();
    let masses = masses?;
    let n = samples.len() as f64;
    let tv = counts
        .iter()
        .zip(&masses)
        .map(|(&c, &m)| (c as f64 / n - m).abs())
        .sum::<f64>()
        * 0.5;
    Ok(tv)
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if samples.len() < 8 {
        return Err(Error::InsufficientSamples { need: 8, got: samples.len() });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    Ok(d)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Compares sample moments `E[Xᵖ]` against analytic values with a 3
/// standard-error threshold per order; the statistic is the worst
/// standardized deviation.
pub fn moment_test(
    test_name: &str,
    samples: &[f64],
    targets: &[(u32, f64)],
    seed: u64,
) -> Result<VerificationReport> {
    if samples.len() < 100 {
        return Err(Error::InsufficientSamples { need: 100, got: samples.len() });
    }
    if targets.is_empty() {
        return Err(Error::domain("moment test needs at least one target"));
    }
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    let mut metadata = BTreeMap::new();
    for &(order, analytic) in targets {
        let powers: Vec<f64> = samples.iter().map(|&x| x.powi(order as i32)).collect();
        let mean = powers.iter().sum::<f64>() / n;
        let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt().max(f64::MIN_POSITIVE);
        let z = (mean - analytic) / se;
        metadata.insert(
            format!("order_{order}"),
            serde_json::json!({"sample": mean, "analytic": analytic, "z": z}),
        );
        worst = worst.max(z.abs());
    }
    Ok(VerificationReport::new(
        test_name,
        worst,
        3.0,
        Direction::Le,
        samples.len() as u64,
        seed,
        metadata,
    ))
}

/// Wilson-Hilferty approximation of the chi-square quantile.
fn chi2_quantile(df: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Chi-square goodness of fit of scalar samples against a density, with
/// expected counts from per-bin Gauss quadrature. Bins expecting fewer than
/// five observations are merged with their neighbor. The threshold is the
/// 99% chi-square quantile.
pub fn chi_square_gof<F>(
    test_name: &str,
    samples: &[f64],
    density: F,
    edges: &[f64],
    seed: u64,
) -> Result<VerificationReport>
where
    F: Fn(f64) -> Result<f64>,
{
    if samples.len() < 200 {
        return Err(Error::InsufficientSamples { need: 200, got: samples.len() });
    }
    if edges.len() < 3 {
        return Err(Error::domain("need at least two bins"));
    }
    let n = samples.len() as f64;
    let (nodes, weights) = gauss_jacobi_01(32, 0.0, 0.0)?;
    let nbins = edges.len() - 1;
    let mut observed = vec![0.0f64; nbins];
    for &x in samples {
        if x < edges[0] || x > edges[nbins] {
            continue; // mass outside the binned range is dropped symmetrically
        }
        let mut idx = edges.partition_point(|&e| e <= x);
        idx = idx.saturating_sub(1).min(nbins - 1);
        observed[idx] += 1.0;
    }
    let mut expected = vec![0.0f64; nbins];
    for b in 0..nbins {
        let (l, r) = (edges[b], edges[b + 1]);
        let mut acc = 0.0;
        for (&t, &w) in nodes.iter().zip(&weights) {
            acc += w * density(l + (r - l) * t)?;
        }
        expected[b] = acc * (r - l) * n;
    }
    // merge sparse bins to the left
    let mut obs_m = Vec::new();
    let mut exp_m = Vec::new();
    let mut co = 0.0;
    let mut ce = 0.0;
    for b in 0..nbins {
        co += observed[b];
        ce += expected[b];
        if ce >= 5.0 {
            obs_m.push(co);
            exp_m.push(ce);
            co = 0.0;
            ce = 0.0;
        }
    }
    if ce > 0.0 || co > 0.0 {
        if let (Some(o), Some(e)) = (obs_m.last_mut(), exp_m.last_mut()) {
            *o += co;
            *e += ce;
        }
    }
    if obs_m.len() < 2 {
        return Err(Error::domain("fewer than two usable bins after merging"));
    }
    let stat: f64 =
        obs_m.iter().zip(&exp_m).map(|(&o, &e)| (o - e) * (o - e) / e).sum();
    let df = (obs_m.len() - 1) as f64;
    let threshold = chi2_quantile(df, 2.3263478740408408);
    let mut metadata = BTreeMap::new();
    metadata.insert("bins_used".into(), serde_json::json!(obs_m.len()));
    metadata.insert("df".into(), serde_json::json!(df));
    Ok(VerificationReport::new(
        test_name,
        stat,
        threshold,
        Direction::Le,
        samples.len() as u64,
        seed,
        metadata,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{dirichlet_log_density, dirichlet_sample};
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn tv_self_consistency_dirichlet() {
        // samples from the density itself: TV is pure binning noise
        let gamma = [1.0, 2.0, 3.0];
        let mut rng = RngStream::new(41, 0);
        let samples: Vec<SimplexPoint> =
            (0..200_000).map(|_| dirichlet_sample(&gamma, &mut rng).unwrap()).collect();
        let grid = SimplexGrid::new(3, 10).unwrap();
        let tv = binned_tv_distance(
            &samples,
            |y| Ok(dirichlet_log_density(y, &gamma).unwrap().exp()),
            &grid,
            None,
        )
        .unwrap();
        assert!(tv <= 0.02, "tv = {tv}");
    }

    #[test]
    fn tv_against_point_mass() {
        // all samples in one cell vs the uniform density: TV = 1 − cell mass
        let grid = SimplexGrid::new(3, 5).unwrap();
        let y = SimplexPoint::new(vec![0.05, 0.05, 0.9]).unwrap();
        let samples = vec![y; 1_000];
        let uniform = 2.0; // density 1/vol on the chart, vol = 1/2
        let tv = binned_tv_distance(&samples, |_| Ok(uniform), &grid, None).unwrap();
        let cellmass = 2.0 * 0.5 / 25.0;
        assert!((tv - (1.0 - cellmass)).abs() < 1e-10, "tv = {tv}");
    }

    #[test]
    fn tv_requires_samples() {
        let grid = SimplexGrid::new(3, 5).unwrap();
        let err = binned_tv_distance(&[], |_| Ok(1.0), &grid, None);
        assert!(matches!(err, Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn singular_cell_masses_sum_to_one() {
        // Dirichlet(0.5, 1, 1.5): y₁-face is singular; total mass must
        // still come out 1 across the cells
        let gamma = [0.5, 1.0, 1.5];
        let exps = [-0.5, 0.0, 0.5];
        let grid = SimplexGrid::new(3, 10).unwrap();
        let total: f64 = (0..grid.cell_count())
            .map(|idx| {
                cell_mass(
                    &|y: &SimplexPoint| Ok(dirichlet_log_density(y, &gamma).unwrap().exp()),
                    &grid,
                    idx,
                    &exps,
                )
                .unwrap()
            })
            .sum();
        assert!((total - 1.0).abs() < 2e-4, "total {total}");
    }

    #[test]
    fn ks_calibration_on_exact_uniforms() {
        let n = 5_000;
        let mut failures = 0;
        for seed in 0..100 {
            let mut rng = RngStream::new(1000 + seed, 0);
            let samples: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
            if d > ks_critical_1pct(n) {
                failures += 1;
            }
        }
        // 1% level: expect ~1 failure in 100 runs
        assert!(failures <= 5, "{failures} of 100 exceeded the 1% critical value");
    }

    #[test]
    fn moment_test_dirichlet_passes() {
        let gamma = [1.0, 2.0, 3.0];
        let total: f64 = gamma.iter().sum();
        let mut rng = RngStream::new(43, 0);
        let first: Vec<f64> = (0..50_000)
            .map(|_| dirichlet_sample(&gamma, &mut rng).unwrap().coords()[0])
            .collect();
        let mean = gamma[0] / total;
        let second = gamma[0] * (gamma[0] + 1.0) / (total * (total + 1.0));
        let report =
            moment_test("dirichlet-moments", &first, &[(1, mean), (2, second)], 43).unwrap();
        assert!(report.pass, "{}", report.to_json());
    }

    #[test]
    fn moment_test_catches_wrong_mean() {
        let mut rng = RngStream::new(44, 0);
        let samples: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let report = moment_test("biased", &samples, &[(1, 0.52)], 44).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn chi_square_on_uniforms() {
        let mut rng = RngStream::new(45, 0);
        let samples: Vec<f64> = (0..30_000).map(|_| rng.random()).collect();
        let edges: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let report = chi_square_gof("uniform", &samples, |_| Ok(1.0), &edges, 45).unwrap();
        assert!(report.pass, "{}", report.to_json());
        // and against the wrong density it must fail
        let report =
            chi_square_gof("not-uniform", &samples, |x| Ok(2.0 * x), &edges, 45).unwrap();
        assert!(!report.pass);
    }
}
