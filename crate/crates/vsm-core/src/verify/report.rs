//! Machine-readable verification results.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Pass when `statistic <= threshold`.
    Le,
    /// Pass when `statistic >= threshold`.
    Ge,
}

/// One named check: a statistic, its threshold, and the run that produced it.
///
/// Serializes to the stable JSON object
/// `{"test", "statistic", "threshold", "direction", "n_samples", "seed",
/// "pass", "metadata"}`; `metadata` is ordered so output bytes are
/// reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    #[serde(rename = "test")]
    pub test_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub n_samples: u64,
    pub seed: u64,
    pub pass: bool,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl VerificationReport {
    pub fn new(
        test_name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        direction: Direction,
        n_samples: u64,
        seed: u64,
        metadata: BTreeMap<String, serde_json::Value>,
    ) -> Self {
        let pass = match direction {
            Direction::Le => statistic <= threshold,
            Direction::Ge => statistic >= threshold,
        };
        VerificationReport {
            test_name: test_name.into(),
            statistic,
            threshold,
            direction,
            n_samples,
            seed,
            pass,
            metadata,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}
