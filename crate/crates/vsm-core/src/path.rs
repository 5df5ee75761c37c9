//! Sampled trajectories.

use crate::error::{Error, Result};

/// A simulated trajectory: a strictly increasing time grid, one nonnegative
/// state vector per time, and the `(seed, stream_index)` that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    seed_record: (u64, u64),
}

impl Path {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>, seed_record: (u64, u64)) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::domain("path must contain at least one time"));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain(format!(
                    "times must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let dim = states[0].len();
        for s in &states {
            if s.len() != dim {
                return Err(Error::Dimension("states must share one dimension".into()));
            }
            for &c in s {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::domain(format!("state coordinates must be >= 0, got {c}")));
                }
            }
        }
        Ok(Path { times, states, seed_record })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn seed_record(&self) -> (u64, u64) {
        self.seed_record
    }

    /// One coordinate as a time series.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// `Σᵢ stateᵢ` along the path.
    pub fn sums(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.iter().sum()).collect()
    }
}
