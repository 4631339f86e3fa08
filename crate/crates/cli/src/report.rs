//! Trial records, report files and plot-ready extracts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Scalar(f64),
    Series(Vec<f64>),
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Scalar(v)
    }
}

impl From<Vec<f64>> for Quantity {
    fn from(v: Vec<f64>) -> Self {
        Quantity::Series(v)
    }
}

/// One checked (or reported) instance of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub trial: u64,
    pub seed: u64,
    /// SHA-256 of the canonical JSON of the trial inputs.
    pub inputs_digest: String,
    pub quantities: BTreeMap<String, Quantity>,
    pub verdict: String,
    pub asserted: bool,
    pub passed: bool,
}

impl Record {
    pub fn new(check: &str, trial: u64, seed: u64, inputs: &serde_json::Value) -> Self {
        Self {
            check: check.to_string(),
            trial,
            seed,
            inputs_digest: digest(inputs),
            quantities: BTreeMap::new(),
            verdict: String::new(),
            asserted: false,
            passed: true,
        }
    }

    pub fn set(&mut self, name: &str, q: impl Into<Quantity>) -> &mut Self {
        self.quantities.insert(name.to_string(), q.into());
        self
    }

    pub fn assert(&mut self, passed: bool, verdict: impl Into<String>) -> &mut Self {
        self.asserted = true;
        self.passed = passed;
        self.verdict = verdict.into();
        self
    }

    pub fn report_only(&mut self, verdict: impl Into<String>) -> &mut Self {
        self.asserted = false;
        self.passed = true;
        self.verdict = verdict.into();
        self
    }

    pub fn violated(&self) -> bool {
        self.asserted && !self.passed
    }
}

pub fn digest(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub trials: u64,
    pub config_digest: String,
    pub violations: usize,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(suite: &str, seed: u64, trials: u64, config: &serde_json::Value, records: Vec<Record>) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            trials,
            config_digest: digest(config),
            violations: records.iter().filter(|r| r.violated()).count(),
            records,
        }
    }

    pub fn first_violation(&self) -> Option<&Record> {
        self.records.iter().find(|r| r.violated())
    }

    /// Names of scalar quantities in first-appearance order across records.
    fn scalar_columns(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.records {
            for (k, q) in &r.quantities {
                if matches!(q, Quantity::Scalar(_)) && !names.contains(k) {
                    names.push(k.clone());
                }
            }
        }
        names
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        self.csv_to(file)
    }

    /// One row per record; series quantities are left to the JSON report.
    pub fn csv_to<W: Write>(&self, out: W) -> Result<()> {
        let columns = self.scalar_columns();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        let mut header = vec![
            "check",
            "trial",
            "seed",
            "inputs_digest",
            "verdict",
            "asserted",
            "passed",
        ];
        header.extend(columns.iter().map(String::as_str));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.check.clone(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.inputs_digest.clone(),
                r.verdict.clone(),
                r.asserted.to_string(),
                r.passed.to_string(),
            ];
            for c in &columns {
                row.push(match r.quantities.get(c) {
                    Some(Quantity::Scalar(v)) => format_number(*v),
                    _ => String::new(),
                });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("{} is not a report", path.display()))
    }
}

fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// `(index, value)` pairs for `quantity`: the series of record `trial` when
/// it is a series, otherwise the scalar across all records by trial.
pub fn plot_data(report: &Report, quantity: &str, trial: Option<u64>) -> Result<Vec<(u64, f64)>> {
    if report.records.is_empty() {
        bail!("report has no records");
    }
    let available = || {
        let mut names: Vec<&str> = report
            .records
            .iter()
            .flat_map(|r| r.quantities.keys().map(String::as_str))
            .collect();
        names.sort_unstable();
        names.dedup();
        names.join(", ")
    };
    let record = match trial {
        Some(t) => report
            .records
            .iter()
            .find(|r| r.trial == t)
            .with_context(|| format!("no record for trial {t}"))?,
        None => &report.records[0],
    };
    match record.quantities.get(quantity) {
        Some(Quantity::Series(values)) => Ok(values.iter().enumerate().map(|(i, v)| (i as u64, *v)).collect()),
        Some(Quantity::Scalar(_)) => Ok(report
            .records
            .iter()
            .filter_map(|r| match r.quantities.get(quantity) {
                Some(Quantity::Scalar(v)) => Some((r.trial, *v)),
                _ => None,
            })
            .collect()),
        None => bail!("unknown quantity {quantity:?}; available: {}", available()),
    }
}

pub fn write_plot_csv<W: Write>(rows: &[(u64, f64)], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(["index", "value"])?;
    for (i, v) in rows {
        w.write_record([i.to_string(), format_number(*v)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut a = Record::new("loss", 0, 11, &serde_json::json!({"x": [0.5]}));
        a.set("loss", 0.25)
            .set("values", vec![1.0, 0.5])
            .assert(true, "ok, with comma");
        let mut b = Record::new("loss", 1, 12, &serde_json::json!({"x": [0.6]}));
        b.set("loss", -1.0).assert(false, "violated");
        Report::new("monotonicity", 42, 2, &serde_json::json!({}), vec![a, b])
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let mut out = Vec::new();
        sample().csv_to(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "check,trial,seed,inputs_digest,verdict,asserted,passed,loss");
        assert!(lines[1].contains("\"ok, with comma\""));
        assert!(lines[1].ends_with(",2.5e-1"));
    }

    #[test]
    fn violations_are_counted() {
        let r = sample();
        assert_eq!(r.violations, 1);
        assert_eq!(r.first_violation().unwrap().trial, 1);
    }

    #[test]
    fn plot_data_series_and_scalars() {
        let r = sample();
        assert_eq!(plot_data(&r, "values", None).unwrap(), vec![(0, 1.0), (1, 0.5)]);
        assert_eq!(plot_data(&r, "loss", None).unwrap(), vec![(0, 0.25), (1, -1.0)]);
        let e = plot_data(&r, "nope", None).unwrap_err().to_string();
        assert!(e.contains("available: loss, values"), "{e}");
        let empty = Report::new("x", 0, 1, &serde_json::json!({}), vec![]);
        assert!(plot_data(&empty, "loss", None).is_err());
    }

    #[test]
    fn digest_is_stable() {
        let a = digest(&serde_json::json!({"b": 1, "a": 2}));
        let b = digest(&serde_json::json!({"a": 2, "b": 1}));
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
