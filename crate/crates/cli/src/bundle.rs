//! The `results.json` document written by every command.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use scorebayes_core::experiments::LabelledSummary;
use scorebayes_core::{GodambeEstimate, SquareMatrix};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GodambeSummary {
    pub k: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

impl From<&GodambeEstimate> for GodambeSummary {
    fn from(e: &GodambeEstimate) -> Self {
        let m = |x: &SquareMatrix| x.rows();
        Self { k: m(&e.k), j: m(&e.j), g: m(&e.g), v: m(&e.v), c: m(&e.c), h: m(&e.h) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub label: String,
    pub parameter: String,
    pub mode: f64,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl From<&LabelledSummary> for SummaryRecord {
    fn from(s: &LabelledSummary) -> Self {
        let x = &s.summary;
        Self {
            label: s.label.clone(),
            parameter: s.parameter.clone(),
            mode: x.mode,
            mean: x.mean,
            sd: x.sd,
            lower: x.lower,
            upper: x.upper,
        }
    }
}

/// A file written next to `results.json`; `path` is relative to the output
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRef {
    pub name: String,
    pub path: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub schema_version: String,
    pub software_version: String,
    pub command: String,
    pub example: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub parameter_names: Vec<String>,
    pub theta_tilde: Vec<f64>,
    pub godambe: Option<GodambeSummary>,
    pub summaries: Vec<SummaryRecord>,
    pub files: Vec<FileRef>,
    /// Scalar results specific to the command and example.
    pub extra: BTreeMap<String, f64>,
}

impl ResultBundle {
    pub fn new(command: &str, example: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            example: example.to_string(),
            seed,
            config,
            parameter_names: Vec::new(),
            theta_tilde: Vec::new(),
            godambe: None,
            summaries: Vec::new(),
            files: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Names of numeric fields holding a non-finite value.
    pub fn non_finite_fields(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let mut check = |name: String, v: f64| {
            if !v.is_finite() {
                bad.push(name);
            }
        };
        for (i, v) in self.theta_tilde.iter().enumerate() {
            check(format!("theta_tilde[{i}]"), *v);
        }
        if let Some(g) = &self.godambe {
            for (name, m) in [("k", &g.k), ("j", &g.j), ("g", &g.g), ("v", &g.v), ("c", &g.c), ("h", &g.h)] {
                for (a, row) in m.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        check(format!("godambe.{name}[{a}][{b}]"), *v);
                    }
                }
            }
        }
        for (i, s) in self.summaries.iter().enumerate() {
            for (f, v) in [("mode", s.mode), ("mean", s.mean), ("sd", s.sd), ("lower", s.lower), ("upper", s.upper)] {
                check(format!("summaries[{i}].{f}"), v);
            }
        }
        for (k, v) in &self.extra {
            check(format!("extra.{k}"), *v);
        }
        bad
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let bad = self.non_finite_fields();
        if let Some(first) = bad.first() {
            return Err(CliError::Numerical {
                op: "result validation",
                source: scorebayes_core::Error::InvalidArgument(format!("non-finite value in {first}")),
            });
        }
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_are_rejected() {
        let mut b = ResultBundle::new("estimate", "vmf", 1, BTreeMap::new());
        b.theta_tilde = vec![1.0];
        assert!(b.to_json().is_ok());
        b.extra.insert("x".into(), f64::NAN);
        let e = b.to_json().unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("extra.x"));
    }

    #[test]
    fn json_round_trip() {
        let mut b = ResultBundle::new("sample", "custom", 9, BTreeMap::from([("n".to_string(), "3".to_string())]));
        b.theta_tilde = vec![0.1 + 0.2];
        b.files.push(FileRef { name: "chain".into(), path: "chain.csv".into(), rows: 10 });
        let back: ResultBundle = serde_json::from_str(&b.to_json().unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
