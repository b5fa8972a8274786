use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one numerical check, as emitted in JSON-lines reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub pass: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub trials: usize,
    /// Seed of the first trial that exceeded the tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample_seed: Option<u64>,
    /// Indices or other data locating the failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl CheckReport {
    /// Empty passing report; deviations are folded in with [`CheckReport::record`].
    pub fn new(property: impl Into<String>, tolerance: f64) -> Self {
        CheckReport {
            property: property.into(),
            pass: true,
            max_deviation: 0.0,
            tolerance,
            trials: 0,
            counterexample_seed: None,
            counterexample: None,
            detail: None,
            elapsed_ms: None,
        }
    }

    /// Folds one trial's deviation into the report.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn record(&mut self, deviation: f64, seed: Option<u64>) {
        self.trials += 1;
        if deviation > self.max_deviation || deviation.is_nan() {
            self.max_deviation = if deviation.is_nan() { f64::MAX } else { deviation };
        }
        // NaN fails
        if !(deviation <= self.tolerance) && self.pass {
            self.pass = false;
            self.counterexample_seed = seed;
        }
    }

    pub fn with_counterexample(mut self, value: Value) -> Self {
        self.counterexample = Some(value);
        self
    }

    pub fn with_detail(mut self, value: Value) -> Self {
        self.detail = Some(value);
        self
    }

    /// Merges another report for the same property (e.g. a later batch of trials).
    pub fn absorb(&mut self, other: &CheckReport) {
        self.trials += other.trials;
        self.max_deviation = self.max_deviation.max(other.max_deviation);
        if self.pass && !other.pass {
            self.pass = false;
            self.counterexample_seed = other.counterexample_seed;
            self.counterexample = other.counterexample.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_is_kept() {
        let mut r = CheckReport::new("x", 1e-10);
        r.record(1e-12, Some(1));
        assert!(r.pass);
        r.record(1e-3, Some(2));
        r.record(1e-1, Some(3));
        assert!(!r.pass);
        assert_eq!(r.counterexample_seed, Some(2));
        assert_eq!(r.max_deviation, 1e-1);
        assert_eq!(r.trials, 3);
    }

    #[test]
    fn nan_fails() {
        let mut r = CheckReport::new("x", 1.0);
        r.record(f64::NAN, None);
        assert!(!r.pass);
        assert!(serde_json::to_string(&r).is_ok());
    }
}
