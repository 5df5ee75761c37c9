//! Gauss-Jacobi quadrature rules by Golub-Welsch.
//!
//! Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix of the
//! three-term recurrence; weights come from the first components of the
//! eigenvectors. Endpoint exponents are carried in the weight function, so
//! integrands with algebraic face singularities are evaluated only through
//! their smooth part.

use crate::error::{Error, Result};
use crate::special::log_gamma;

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix, by implicit-shift QL. `d` is the diagonal, `e[i]` the coupling
/// between rows `i` and `i+1` (`e[n-1]` unused).
fn tridiag_eigen(d: &mut [f64], e: &mut [f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    if n == 1 {
        return Ok(z);
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::NonConvergent("tridiagonal QL stalled".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(z)
}

/// Nodes and weights for `∫₀¹ t^a (1−t)^b f(t) dt`, exact for polynomials
/// `f` of degree `≤ 2n−1`. Requires `a, b > −1`.
pub(crate) fn gauss_jacobi_01(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::domain("quadrature rule needs at least one node"));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::domain(format!("Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    // weight (1−x)^α (1+x)^β on [−1,1] with α = b, β = a maps to t = (1+x)/2
    let alpha = b;
    let beta = a;
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let den = 2.0 * kf + ab;
        diag[k] = (beta * beta - alpha * alpha) / (den * (den + 2.0));
        let bk = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                / (den * den * (den + 1.0) * (den - 1.0))
        };
        off[k - 1] = bk.sqrt();
    }
    let first = tridiag_eigen(&mut diag, &mut off)?;
    // total mass on [0,1]: B(a+1, b+1)
    let ln_mass = log_gamma(a + 1.0)? + log_gamma(b + 1.0)? - log_gamma(a + b + 2.0)?;
    let mass = ln_mass.exp();
    let mut pairs: Vec<(f64, f64)> = diag
        .iter()
        .zip(&first)
        .map(|(&x, &f)| ((1.0 + x) * 0.5, mass * f * f))
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    Ok(pairs.into_iter().unzip())
}
