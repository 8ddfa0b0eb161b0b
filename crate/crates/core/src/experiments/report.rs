use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::stats::Estimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledEstimate {
    pub label: String,
    pub value: f64,
    pub se: f64,
}

/// A reference value: an exact target (`kind = "target"`) or an upper or
/// lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub label: String,
    pub kind: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: String,
    pub pass: bool,
    /// The rule applied, with the tolerance spelled out.
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub estimates: Vec<LabeledEstimate>,
    pub targets: Vec<Target>,
    pub verdicts: Vec<Verdict>,
    pub seed: u64,
    pub trials: u64,
    pub elapsed_ms: u64,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, seed: u64, trials: u64) -> Self {
        ExperimentReport {
            name: name.into(),
            params: BTreeMap::new(),
            estimates: Vec::new(),
            targets: Vec::new(),
            verdicts: Vec::new(),
            seed,
            trials,
            elapsed_ms: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn estimate(&mut self, label: &str, e: Estimate) -> &mut Self {
        self.estimates.push(LabeledEstimate {
            label: label.to_string(),
            value: e.value,
            se: e.se,
        });
        self
    }

    pub fn target(&mut self, label: &str, value: f64) -> &mut Self {
        self.reference(label, "target", value)
    }

    pub fn upper_bound(&mut self, label: &str, value: f64) -> &mut Self {
        self.reference(label, "upper_bound", value)
    }

    pub fn lower_bound(&mut self, label: &str, value: f64) -> &mut Self {
        self.reference(label, "lower_bound", value)
    }

    fn reference(&mut self, label: &str, kind: &str, value: f64) -> &mut Self {
        self.targets.push(Target {
            label: label.to_string(),
            kind: kind.to_string(),
            value,
        });
        self
    }

    pub fn verdict(&mut self, label: &str, pass: bool, rule: impl Into<String>) -> &mut Self {
        self.verdicts.push(Verdict {
            label: label.to_string(),
            pass,
            rule: rule.into(),
        });
        self
    }

    pub fn get(&self, label: &str) -> Option<&LabeledEstimate> {
        self.estimates.iter().find(|e| e.label == label)
    }

    pub fn verdict_for(&self, label: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.label == label)
    }

    /// True when every verdict passed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// The report with its wall-time field cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        ExperimentReport {
            elapsed_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flattened rows: one per estimate, joined with the target and verdict
    /// that share its label.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        if header {
            w.write_record(CSV_COLUMNS)?;
        }
        for e in &self.estimates {
            let target = self
                .targets
                .iter()
                .find(|t| t.label == e.label)
                .map(|t| t.value.to_string())
                .unwrap_or_default();
            let verdict = self
                .verdict_for(&e.label)
                .map(|v| if v.pass { "pass" } else { "fail" })
                .unwrap_or_default();
            w.write_record([
                format!("{}/{}", self.name, e.label),
                e.value.to_string(),
                e.se.to_string(),
                target,
                verdict.to_string(),
                self.seed.to_string(),
                self.trials.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, true)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub const CSV_COLUMNS: [&str; 7] = ["name", "estimate", "se", "target_or_bound", "verdict", "seed", "trials"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv_shapes() {
        let mut r = ExperimentReport::new("demo", 42, 1000);
        r.param("eps", 0.25)
            .estimate("mean", Estimate { value: 3.0, se: 0.1 })
            .target("mean", 3.04)
            .verdict("mean", true, "|mean - target| <= 3 se");
        let json: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["name", "params", "estimates", "targets", "verdicts", "seed", "trials", "elapsed_ms"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["estimates"][0]["label"], "mean");
        let csv = r.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "name,estimate,se,target_or_bound,verdict,seed,trials");
        assert_eq!(lines.next().unwrap(), "demo/mean,3,0.1,3.04,pass,42,1000");
        assert!(r.passed());
        r.verdict("other", false, "x");
        assert!(!r.passed());
    }
}
