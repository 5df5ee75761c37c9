//! Points of the closed unit simplex and the nonnegative quadrant.

use crate::error::{Error, Result};

/// Construction band: coordinate sums within this distance of 1 are
/// renormalized, anything further out is rejected.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// A point of the oblique face `{y ≥ 0, Σyᵢ = 1}` of the unit simplex.
///
/// Construction renormalizes sums within [`SIMPLEX_SUM_TOL`] of 1 and
/// rejects anything outside that band, so downstream code never re-checks
/// the sum.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("simplex point must have at least one coordinate"));
        }
        for &c in &coords {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::domain(format!(
                    "simplex coordinates must be nonnegative and finite, got {c}"
                )));
            }
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::domain(format!(
                "simplex coordinates must sum to 1 within {SIMPLEX_SUM_TOL:e}, got {sum}"
            )));
        }
        let coords = coords.into_iter().map(|c| c / sum).collect();
        Ok(SimplexPoint { coords })
    }

    /// Builds from the first `n-1` chart coordinates; the last one is `1 − Σ`.
    pub fn from_chart(chart: &[f64]) -> Result<Self> {
        let partial: f64 = chart.iter().sum();
        if partial > 1.0 + SIMPLEX_SUM_TOL {
            return Err(Error::domain(format!(
                "chart coordinates sum to {partial} > 1"
            )));
        }
        let mut coords = chart.to_vec();
        coords.push((1.0 - partial).max(0.0));
        SimplexPoint::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// The first `n-1` coordinates; the chart used for all densities and
    /// quadrature on the face.
    pub fn chart(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }
}

/// A point of the closed nonnegative quadrant.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadrantPoint {
    coords: Vec<f64>,
}

impl QuadrantPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("quadrant point must have at least one coordinate"));
        }
        for &c in &coords {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::domain(format!(
                    "quadrant coordinates must be nonnegative and finite, got {c}"
                )));
            }
        }
        Ok(QuadrantPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn sum(&self) -> f64 {
        self.coords.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_within_band() {
        let p = SimplexPoint::new(vec![0.3, 0.7 + 5e-13]).unwrap();
        let s: f64 = p.coords().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_outside_band() {
        assert!(SimplexPoint::new(vec![0.3, 0.8]).is_err());
        assert!(SimplexPoint::new(vec![0.3, -0.1, 0.8]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
    }

    #[test]
    fn chart_roundtrip() {
        let p = SimplexPoint::from_chart(&[0.2, 0.3]).unwrap();
        assert_eq!(p.coords(), &[0.2, 0.3, 0.5]);
        assert_eq!(p.chart(), &[0.2, 0.3]);
    }

    #[test]
    fn quadrant_allows_any_nonnegative() {
        let q = QuadrantPoint::new(vec![0.0, 5.0, 1e-30]).unwrap();
        assert_eq!(q.sum(), 5.0 + 1e-30);
        assert!(QuadrantPoint::new(vec![-0.1]).is_err());
    }
}
