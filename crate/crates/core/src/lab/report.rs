//! Experiment reports and their CSV/JSON serialisations.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::OutputFormat;
use crate::error::Result;
use crate::numkit::LogLogFit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    /// `n`, `t`, a ladder degree or a coefficient index.
    pub key: f64,
    pub measured: f64,
    pub reference: f64,
    pub ratio: f64,
}

impl ReportRow {
    pub fn new(key: f64, measured: f64, reference: f64) -> Self {
        Self {
            key,
            measured,
            reference,
            ratio: measured / reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rows: Vec<ReportRow>,
    pub fit: Option<LogLogFit>,
    pub metadata: Map<String, Value>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl RateReport {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        Self {
            rows,
            fit: None,
            metadata: Map::new(),
        }
    }

    pub fn with_fit(mut self, fit: Option<LogLogFit>) -> Self {
        self.fit = fit;
        self
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metadata.insert(key.to_string(), v);
    }

    /// `key,measured,reference,ratio` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,measured,reference,ratio\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(row.key),
                num(row.measured),
                num(row.reference),
                num(row.ratio)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialises");
        text.push('\n');
        text
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let report = RateReport::new(vec![ReportRow::new(64.0, 0.1, 0.2), ReportRow::new(128.0, 1.0 / 3.0, 1.0)]);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines[0], "key,measured,reference,ratio");
        assert_eq!(
            lines[1],
            "6.4000000000000000e1,1.0000000000000001e-1,2.0000000000000001e-1,5.0000000000000000e-1"
        );
        assert_eq!(lines[2].split(',').nth(1).unwrap(), "3.3333333333333331e-1");
        assert_eq!(lines.len(), 4);
        assert!(!csv.contains('\r'));
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn json_mirrors_rows() {
        let mut report = RateReport::new(vec![ReportRow::new(1.0, 2.0, 4.0)]);
        report.meta("note", "x");
        let v: Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["rows"][0]["ratio"], 0.5);
        assert_eq!(v["metadata"]["note"], "x");
        assert!(v["fit"].is_null());
    }
}
