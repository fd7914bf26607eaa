//! One JSON object per run, written as a single line on stdout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// JSON schema every report validates against.
pub const SCHEMA: &str = include_str!("../schema/run_report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Flagged,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Error => 1,
            Status::Flagged => 2,
        }
    }

    /// The more severe of two statuses.
    pub fn worst(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Ok => 0,
            Status::Flagged => 1,
            Status::Error => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub status: Status,
    /// Wall-clock time. Kept outside `metrics` so that repeated runs give
    /// identical metric maps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            parameters: BTreeMap::new(),
            metrics: BTreeMap::new(),
            status: Status::Ok,
            elapsed_ms: None,
            warnings: Vec::new(),
            message: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    /// Records a metric. Non-finite values are dropped and turn the report
    /// into a flagged one, so the output stays valid JSON.
    pub fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.metrics.insert(key.to_string(), value);
        } else {
            self.warn(format!("metric `{key}` is not finite ({value})"));
        }
        self
    }

    /// Adds a warning and flags the report.
    pub fn warn(&mut self, warning: impl Into<String>) -> &mut Self {
        self.warnings.push(warning.into());
        self.status = self.status.worst(Status::Flagged);
        self
    }

    pub fn warnings_from(&mut self, warnings: &[randnla::Warning]) -> &mut Self {
        for w in warnings {
            self.warn(format!("{w:?}"));
        }
        self
    }

    pub fn error(command: impl Into<String>, seed: u64, message: impl Into<String>) -> Self {
        let mut r = Self::new(command, seed);
        r.status = Status::Error;
        r.message = Some(message.into());
        r
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports hold only finite numbers")
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut out = format!("{} [{:?}]", self.command, self.status);
        for (k, v) in &self.metrics {
            if *v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
                out.push_str(&format!(" {k}={v:.6}"));
            } else {
                out.push_str(&format!(" {k}={v:.3e}"));
            }
        }
        if let Some(m) = &self.message {
            out.push_str(&format!(" : {m}"));
        }
        for w in &self.warnings {
            out.push_str(&format!("\n  warning: {w}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_written_verbatim() {
        let r = RunReport::new("sketch", u64::MAX);
        assert!(r.to_json_line().contains("\"seed\":18446744073709551615"));
        let back: RunReport = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(back.seed, u64::MAX);
    }

    #[test]
    fn non_finite_metrics_flag_the_report() {
        let mut r = RunReport::new("x", 1);
        r.metric("a", 1.0).metric("b", f64::NAN);
        assert_eq!(r.status, Status::Flagged);
        assert!(!r.metrics.contains_key("b"));
        assert_eq!(r.status.exit_code(), 2);
    }

    #[test]
    fn status_severity_orders() {
        assert_eq!(Status::Ok.worst(Status::Flagged), Status::Flagged);
        assert_eq!(Status::Error.worst(Status::Flagged), Status::Error);
        assert_eq!(RunReport::error("x", 0, "boom").status.exit_code(), 1);
    }
}
