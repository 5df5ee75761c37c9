//! Log-gamma, log-multinomial coefficients, and composition enumeration.

use crate::error::{Error, Result};

/// Natural log of the gamma function.
///
/// Thin domain-checked wrapper over the Lanczos evaluation in `statrs`,
/// which holds absolute error below ~1e-13 across `[1e-3, 1e3]`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// A vector of nonnegative integers together with its total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex {
    k: Vec<usize>,
    m: usize,
}

impl MultiIndex {
    pub fn new(k: Vec<usize>) -> Self {
        let m = k.iter().sum();
        MultiIndex { k, m }
    }

    pub fn components(&self) -> &[usize] {
        &self.k
    }

    /// Total degree `Σ kᵢ`.
    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }
}

/// `ln( m! / ∏ kᵢ! )`, the log multinomial coefficient.
pub fn log_multinomial(m: usize, k: &MultiIndex) -> Result<f64> {
    if k.degree() != m {
        return Err(Error::Dimension(format!(
            "multinomial requires Σkᵢ = m, got Σkᵢ = {} and m = {m}",
            k.degree()
        )));
    }
    let mut out = log_gamma((m + 1) as f64)?;
    for &ki in k.components() {
        out -= log_gamma((ki + 1) as f64)?;
    }
    Ok(out)
}

/// Iterator over all compositions of `m` into `n` nonnegative parts.
///
/// Yields `(m,0,…,0)` first and `(0,…,0,m)` last, each composition exactly
/// once; the total count is `C(m+n-1, n-1)`.
pub struct Compositions {
    current: Option<Vec<usize>>,
}

pub fn compositions(m: usize, n: usize) -> Result<Compositions> {
    if n == 0 {
        return Err(Error::domain("compositions require n >= 1"));
    }
    let mut first = vec![0usize; n];
    first[0] = m;
    Ok(Compositions { current: Some(first) })
}

impl Iterator for Compositions {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let cur = self.current.take()?;
        let n = cur.len();
        let out = MultiIndex::new(cur.clone());
        if n > 1 {
            // rightmost position before the tail that can still donate
            if let Some(j) = (0..n - 1).rev().find(|&j| cur[j] > 0) {
                let mut next = cur;
                let tail = next[n - 1];
                next[j] -= 1;
                next[j + 1] = tail + 1;
                for slot in next.iter_mut().skip(j + 2) {
                    *slot = 0;
                }
                self.current = Some(next);
            }
        }
        Some(out)
    }
}

/// `C(m+n-1, n-1)` as an exact integer; the number of compositions.
pub fn composition_count(m: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..(n - 1) as u128 {
        acc = acc * (m as u128 + i + 1) / (i + 1);
    }
    acc
}
