//! Verification and experiment reports, emitted as JSON records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One checked quantity at one vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub vertex: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(flatten)]
    pub detail: BTreeMap<String, Value>,
}

impl Record {
    pub fn new(vertex: impl Into<String>, value: f64, threshold: f64, pass: bool) -> Self {
        Record {
            vertex: vertex.into(),
            value,
            threshold,
            pass,
            detail: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.detail.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(check: impl Into<String>) -> Self {
        Report {
            check: check.into(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json_lines(&self) -> String {
        json_lines(&self.records)
    }
}

/// One sequence or restart of a randomized experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: usize,
    pub seed: u64,
    pub pass: bool,
    #[serde(flatten)]
    pub detail: BTreeMap<String, Value>,
}

impl ExperimentRecord {
    pub fn new(id: usize, seed: u64, pass: bool) -> Self {
        ExperimentRecord {
            id,
            seed,
            pass,
            detail: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.detail.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub note: String,
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| !r.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn to_json_lines(&self) -> String {
        json_lines(&self.records)
    }
}

/// One compact JSON object per line, keys sorted.
pub fn json_lines<S: Serialize>(items: &[S]) -> String {
    let mut out = String::new();
    for it in items {
        let v = serde_json::to_value(it).expect("report records serialize");
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_serialize_flat_with_sorted_keys() {
        let r = Record::new("1 2", 0.5, 1.0, true).with("alpha", 3);
        let line = json_lines(&[r]);
        assert_eq!(
            line,
            "{\"alpha\":3,\"pass\":true,\"threshold\":1.0,\"value\":0.5,\"vertex\":\"1 2\"}\n"
        );
    }

    #[test]
    fn report_pass_aggregation() {
        let mut rep = Report::new("x");
        assert!(rep.passed());
        rep.push(Record::new("1", 0.0, 0.0, true));
        rep.push(Record::new("2", 1.0, 0.0, false));
        assert!(!rep.passed());
        assert_eq!(rep.failures().count(), 1);
    }
}
