//! Quadrature over the simplex face in the stick-breaking chart.
//!
//! The chart integral factorizes: with `yᵢ = vᵢ ∏_{j<i}(1−vⱼ)` the measure
//! `∏ yᵢ^{νᵢ} dy₁…dy_{n−1}` becomes a tensor product of one-dimensional
//! Beta-type weights `vᵢ^{νᵢ}(1−vᵢ)^{βᵢ}`, so declared face singularities
//! are absorbed exactly into Gauss-Jacobi weights and only the smooth part
//! of the integrand is sampled.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;
use crate::verify::gauss_jacobi_01;
use crate::verify::grid::SimplexGrid;

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    /// Difference against a coarser rule; a convergence diagnostic, not an
    /// error bound.
    pub error_indicator: f64,
    pub nodes_per_axis: usize,
}

fn eval_tensor<F>(f: &F, n: usize, exps: &[f64], nodes: usize) -> Result<f64>
where
    F: Fn(&SimplexPoint) -> Result<f64> + Sync,
{
    let gammas: Vec<f64> = exps.iter().map(|&e| 1.0 + e).collect();
    // axis i weight: v^{νᵢ} (1−v)^{Σ_{j>i} γⱼ − 1}
    let mut rules = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let tail: f64 = gammas[i + 1..].iter().sum();
        rules.push(gauss_jacobi_01(nodes, exps[i], tail - 1.0)?);
    }
    let outer = &rules[0];
    let partials: Result<Vec<f64>> = outer
        .0
        .par_iter()
        .zip(outer.1.par_iter())
        .map(|(&v0, &w0)| {
            let mut acc = 0.0;
            let mut v = vec![0.0; n - 1];
            v[0] = v0;
            let mut idx = vec![0usize; n - 1];
            loop {
                // fill remaining axes from idx
                for axis in 1..n - 1 {
                    v[axis] = rules[axis].0[idx[axis]];
                }
                let mut weight = w0;
                for axis in 1..n - 1 {
                    weight *= rules[axis].1[idx[axis]];
                }
                // stick-breaking map and the smooth part of the integrand
                let mut y = vec![0.0; n];
                let mut stick = 1.0;
                for i in 0..n - 1 {
                    y[i] = v[i] * stick;
                    stick *= 1.0 - v[i];
                }
                y[n - 1] = stick;
                let mut ln_scale = 0.0;
                for i in 0..n {
                    if exps[i] != 0.0 {
                        ln_scale -= exps[i] * y[i].ln();
                    }
                }
                let point = SimplexPoint::new(y)?;
                acc += weight * f(&point)? * ln_scale.exp();

                // odometer over axes 1..n-1
                let mut axis = 1;
                loop {
                    if axis >= n - 1 {
                        return Ok(acc);
                    }
                    idx[axis] += 1;
                    if idx[axis] < nodes {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
            }
        })
        .collect();
    Ok(partials?.iter().sum())
}

/// Integrates `f` over the face `Σy = 1` against Lebesgue measure on the
/// first `n−1` coordinates.
///
/// `singularity_exponents` declares `f ~ ∏ yᵢ^{νᵢ} × smooth`; exponents in
/// `(-1, 0)` are integrable face singularities handled by the weight. The
/// grid's resolution sets the nodes per axis (at least 8). Errors with
/// [`Error::NonConvergent`] when the coarse/fine comparison disagrees, e.g.
/// when an undeclared singularity defeats the rule.
pub fn simplex_quadrature<F>(
    f: F,
    grid: &SimplexGrid,
    singularity_exponents: Option<&[f64]>,
) -> Result<Quadrature>
where
    F: Fn(&SimplexPoint) -> Result<f64> + Sync,
{
    let n = grid.n();
    let nodes = grid.resolution().max(8);
    let zeros = vec![0.0; n];
    let exps = match singularity_exponents {
        Some(e) => {
            if e.len() != n {
                return Err(Error::Dimension("exponent vector must have length n".into()));
            }
            for &nu in e {
                if nu <= -1.0 {
                    return Err(Error::domain(format!("exponent {nu} is not integrable")));
                }
            }
            e
        }
        None => &zeros,
    };
    let coarse_nodes = (3 * nodes / 4).max(8);
    let value = eval_tensor(&f, n, exps, nodes)?;
    let coarse = if coarse_nodes == nodes {
        eval_tensor(&f, n, exps, nodes.saturating_sub(2).max(4))?
    } else {
        eval_tensor(&f, n, exps, coarse_nodes)?
    };
    let error_indicator = (value - coarse).abs();
    if !value.is_finite() {
        return Err(Error::NonConvergent("integrand produced a non-finite value".into()));
    }
    if error_indicator > (3e-6 * value.abs()).max(1e-7) {
        return Err(Error::NonConvergent(format!(
            "refinement moved the estimate by {error_indicator:.3e} (value {value:.6e}); \
             an undeclared singularity or insufficient resolution"
        )));
    }
    Ok(Quadrature { value, error_indicator, nodes_per_axis: nodes })
}
