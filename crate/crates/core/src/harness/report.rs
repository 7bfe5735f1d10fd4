//! Coverage reports and their table, CSV and JSON forms.
//!
//! Every floating-point value is written with at most six significant digits.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stopping::{RuleKind, StoppingResult};
use crate::types::{ParameterKind, ParameterSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub rate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / scored)`.
    pub se: f64,
    pub scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterCoverage {
    pub id: String,
    #[serde(flatten)]
    pub kind: ParameterKind,
    pub component: usize,
    pub epsilon: f64,
    pub truth: Option<f64>,
    pub coverage: Option<Coverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: RuleKind,
    pub epsilon_scale: f64,
    pub delta: f64,
    pub stopped: usize,
    pub capped: usize,
    pub mean_nstop: f64,
    pub sd_nstop: f64,
    pub parameters: Vec<ParameterCoverage>,
    /// Joint coverage of all intervals, when a Bonferroni level is set.
    pub region: Option<Coverage>,
}

impl RuleSummary {
    /// `T1(0.1)` when every parameter shares one epsilon, else `T1(x0.5)`.
    pub fn label(&self) -> String {
        let first = self.parameters.first().map_or(0.0, |p| p.epsilon);
        if self.parameters.iter().all(|p| p.epsilon == first) {
            format!("{}({})", self.rule.short_name(), sig6(first))
        } else {
            format!("{}(x{})", self.rule.short_name(), sig6(self.epsilon_scale))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub sampler: String,
    pub replications: usize,
    pub seed: u64,
    pub rules: Vec<RuleSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(format!("unknown format {other:?} (table, csv or json)"))),
        }
    }
}

/// Rounds to six significant digits.
pub fn round6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn sig6(x: f64) -> String {
    format!("{}", round6(x))
}

/// One CSV line. Region rows use `parameter = kind = "region"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub rule: String,
    pub epsilon: Option<f64>,
    pub parameter: String,
    pub kind: String,
    pub q: Option<f64>,
    pub coverage: Option<f64>,
    pub coverage_se: Option<f64>,
    pub mean_nstop: f64,
    pub sd_nstop: f64,
    pub capped: usize,
    pub truth: Option<f64>,
}

impl CoverageReport {
    /// The report as CSV rows, floats already rounded to six digits.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let r = |x: Option<f64>| x.map(round6);
        let mut rows = Vec::new();
        for s in &self.rules {
            for p in &s.parameters {
                rows.push(CsvRow {
                    rule: s.rule.name().to_string(),
                    epsilon: Some(round6(p.epsilon)),
                    parameter: p.id.clone(),
                    kind: match p.kind {
                        ParameterKind::Mean => "mean".into(),
                        ParameterKind::Quantile { .. } => "quantile".into(),
                    },
                    q: r(p.kind.quantile_level()),
                    coverage: r(p.coverage.map(|c| c.rate)),
                    coverage_se: r(p.coverage.map(|c| c.se)),
                    mean_nstop: round6(s.mean_nstop),
                    sd_nstop: round6(s.sd_nstop),
                    capped: s.capped,
                    truth: r(p.truth),
                });
            }
            if let Some(c) = s.region {
                rows.push(CsvRow {
                    rule: s.rule.name().to_string(),
                    epsilon: None,
                    parameter: "region".into(),
                    kind: "region".into(),
                    q: None,
                    coverage: Some(round6(c.rate)),
                    coverage_se: Some(round6(c.se)),
                    mean_nstop: round6(s.mean_nstop),
                    sd_nstop: round6(s.sd_nstop),
                    capped: s.capped,
                    truth: None,
                });
            }
        }
        rows
    }
}

fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round6(x))) {
                *n = x;
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

fn cov_cell(c: Option<Coverage>) -> String {
    match c {
        Some(c) => format!("{} ({})", sig6(c.rate), sig6(c.se)),
        None => "-".into(),
    }
}

fn table(report: &CoverageReport) -> String {
    let mut header = vec!["rule".to_string(), "length (sd)".into(), "capped".into()];
    let first = &report.rules[0];
    header.extend(first.parameters.iter().map(|p| p.id.clone()));
    let has_region = report.rules.iter().any(|s| s.region.is_some());
    if has_region {
        header.push("region".into());
    }
    let mut body: Vec<Vec<String>> = Vec::new();
    for s in &report.rules {
        let mut row = vec![
            s.label(),
            format!("{} ({})", sig6(s.mean_nstop), sig6(s.sd_nstop)),
            s.capped.to_string(),
        ];
        row.extend(s.parameters.iter().map(|p| cov_cell(p.coverage)));
        if has_region {
            row.push(cov_cell(s.region));
        }
        body.push(row);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|j| {
            body.iter()
                .map(|r| r[j].len())
                .chain(std::iter::once(header[j].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "sampler: {}  replications: {}  seed: {}  delta: {}",
        report.sampler,
        report.replications,
        report.seed,
        sig6(first.delta)
    );
    for row in std::iter::once(&header).chain(&body) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    let truths: Vec<String> = first
        .parameters
        .iter()
        .map(|p| match p.truth {
            Some(t) => format!("{} = {}", p.id, sig6(t)),
            None => format!("{} = unknown", p.id),
        })
        .collect();
    let _ = writeln!(out, "truth: {}", truths.join(", "));
    out
}

/// Renders a report. Reports with no replications or rules are rejected.
pub fn emit_report(report: &CoverageReport, format: OutputFormat) -> Result<String> {
    if report.replications == 0 || report.rules.is_empty() {
        return Err(Error::config("refusing to write an empty report"));
    }
    match format {
        OutputFormat::Table => Ok(table(report)),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in report.csv_rows() {
                w.serialize(row).map_err(|e| Error::config(format!("csv: {e}")))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::config(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::Json => {
            let mut v = serde_json::to_value(report).map_err(|e| Error::config(format!("json: {e}")))?;
            round_json(&mut v);
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::config(format!("json: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn write_report(report: &CoverageReport, format: OutputFormat, path: &Path) -> Result<()> {
    let text = emit_report(report, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Per-parameter rows of a single sequential run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub rule: String,
    pub epsilon: f64,
    pub parameter: String,
    pub n_stop: usize,
    pub capped: bool,
    pub point: Option<f64>,
    pub half_width: Option<f64>,
    pub sigma_hat: Option<f64>,
    pub lambda_hat: Option<f64>,
}

pub fn run_rows(results: &[StoppingResult], specs: &[ParameterSpec]) -> Vec<RunRow> {
    let mut rows = Vec::new();
    for res in results {
        for (i, spec) in specs.iter().enumerate() {
            let est = res.estimates[i];
            rows.push(RunRow {
                rule: res.rule.kind.name().to_string(),
                epsilon: round6(res.epsilons[i]),
                parameter: spec.id.clone(),
                n_stop: res.n_stop,
                capped: res.capped,
                point: est.map(|e| round6(e.point)),
                half_width: est.map(|e| round6(e.half_width)),
                sigma_hat: est.map(|e| round6(e.sigma_hat)),
                lambda_hat: est.map(|e| round6(e.lambda_hat)),
            });
        }
    }
    rows
}

/// Renders the results of one run.
pub fn emit_run(results: &[StoppingResult], specs: &[ParameterSpec], format: OutputFormat) -> Result<String> {
    let rows = run_rows(results, specs);
    if rows.is_empty() {
        return Err(Error::config("refusing to write an empty report"));
    }
    match format {
        OutputFormat::Table => {
            let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), sig6);
            let mut out = String::new();
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<20} {:<10} n_stop {:<9} {} +/- {}  (sigma {}, lambda {}){}",
                    r.rule,
                    r.parameter,
                    r.n_stop,
                    cell(r.point),
                    cell(r.half_width),
                    cell(r.sigma_hat),
                    cell(r.lambda_hat),
                    if r.capped { "  capped" } else { "" }
                );
            }
            Ok(out)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| Error::config(format!("csv: {e}")))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::config(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).map_err(|e| Error::config(format!("json: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .map_err(|e| Error::config(format!("csv: {e}")))
}
