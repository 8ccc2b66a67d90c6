//! Report rows, CSV and JSON output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

pub const CSV_HEADER: [&str; 6] = [
    "scenario",
    "param",
    "measured",
    "reference",
    "rel_error",
    "status",
];
pub const SCHEMA_VERSION: &str = "accretive-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        })
    }
}

impl Status {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(Status::Pass),
            "fail" => Some(Status::Fail),
            "error" => Some(Status::Error),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub param: String,
    pub measured: f64,
    pub reference: f64,
    pub rel_error: f64,
    pub status: Status,
}

fn rel(measured: f64, reference: f64) -> f64 {
    let diff = (measured - reference).abs();
    if reference == 0.0 {
        diff
    } else {
        diff / reference.abs()
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl ReportRow {
    /// Passes when `|measured - reference| <= tol`.
    pub fn absolute(
        scenario: &str,
        param: impl Into<String>,
        measured: f64,
        reference: f64,
        tol: f64,
    ) -> Self {
        ReportRow {
            scenario: scenario.into(),
            param: param.into(),
            measured,
            reference,
            rel_error: rel(measured, reference),
            status: pass_if((measured - reference).abs() <= tol),
        }
    }

    /// Passes when the relative error is at most `tol`.
    pub fn relative(
        scenario: &str,
        param: impl Into<String>,
        measured: f64,
        reference: f64,
        tol: f64,
    ) -> Self {
        let r = rel(measured, reference);
        ReportRow {
            scenario: scenario.into(),
            param: param.into(),
            measured,
            reference,
            rel_error: r,
            status: pass_if(r <= tol),
        }
    }

    /// Passes when `measured <= bound`; the bound is the reference column.
    pub fn at_most(scenario: &str, param: impl Into<String>, measured: f64, bound: f64) -> Self {
        ReportRow {
            scenario: scenario.into(),
            param: param.into(),
            measured,
            reference: bound,
            rel_error: rel(measured, bound),
            status: pass_if(measured <= bound),
        }
    }

    /// Passes when `lo <= measured <= hi`; the reference column holds the midpoint.
    pub fn within(scenario: &str, param: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        ReportRow {
            scenario: scenario.into(),
            param: param.into(),
            measured,
            reference: mid,
            rel_error: rel(measured, mid),
            status: pass_if(measured >= lo && measured <= hi),
        }
    }

    /// A boolean verdict encoded as 1/0 against the expected value.
    pub fn flag(scenario: &str, param: impl Into<String>, measured: bool, expected: bool) -> Self {
        let (m, r) = (f64::from(u8::from(measured)), f64::from(u8::from(expected)));
        ReportRow {
            scenario: scenario.into(),
            param: param.into(),
            measured: m,
            reference: r,
            rel_error: (m - r).abs(),
            status: pass_if(measured == expected),
        }
    }

    /// Informational value; always passes.
    pub fn info(scenario: &str, param: impl Into<String>, measured: f64) -> Self {
        ReportRow {
            scenario: scenario.into(),
            param: param.into(),
            measured,
            reference: f64::NAN,
            rel_error: f64::NAN,
            status: Status::Pass,
        }
    }

    /// A solver failure; the message goes into the parameter column.
    pub fn errored(scenario: &str, param: impl Into<String>, message: impl fmt::Display) -> Self {
        let msg = message.to_string().replace([',', '\n', '"'], ";");
        ReportRow {
            scenario: scenario.into(),
            param: format!("{} [{msg}]", param.into()),
            measured: f64::NAN,
            reference: f64::NAN,
            rel_error: f64::NAN,
            status: Status::Error,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn exit_code(rows: &[ReportRow]) -> i32 {
    i32::from(rows.iter().any(|r| !r.passed()))
}

pub fn to_csv(rows: &[ReportRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.as_str(),
            r.param.as_str(),
            &format_number(r.measured),
            &format_number(r.reference),
            &format_number(r.rel_error),
            &r.status.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<ReportRow>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(CliError::Report(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| -> Result<f64, CliError> {
        s.parse::<f64>()
            .map_err(|_| CliError::Report(format!("bad number {s:?}")))
    };
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ReportRow {
                scenario: rec[0].to_owned(),
                param: rec[1].to_owned(),
                measured: num(&rec[2])?,
                reference: num(&rec[3])?,
                rel_error: num(&rec[4])?,
                status: Status::parse(&rec[5])
                    .ok_or_else(|| CliError::Report(format!("bad status {:?}", &rec[5])))?,
            })
        })
        .collect()
}

pub fn summary_json(scenario: &str, seed: u64, rows: &[ReportRow]) -> Value {
    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    json!({
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "seed": seed,
        "rows": rows.len(),
        "passed": count(Status::Pass),
        "failed": count(Status::Fail),
        "errored": count(Status::Error),
        "exit_status": exit_code(rows),
    })
}

/// Files written for one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenReport {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub metadata: PathBuf,
}

/// Writes `<scenario>.csv`, `<scenario>.summary.json` and
/// `<scenario>.meta.json` (the only file holding wall-clock data).
pub fn write_report(
    dir: &Path,
    scenario: &str,
    seed: u64,
    rows: &[ReportRow],
    extra_meta: Value,
) -> Result<WrittenReport, CliError> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{scenario}.csv"));
    let summary = dir.join(format!("{scenario}.summary.json"));
    let metadata = dir.join(format!("{scenario}.meta.json"));
    fs::write(&csv, to_csv(rows)?)?;
    fs::write(&summary, pretty(&summary_json(scenario, seed, rows)))?;
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "finished_unix_seconds": now,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "extra": extra_meta,
    });
    fs::write(&metadata, pretty(&meta))?;
    Ok(WrittenReport {
        csv,
        summary,
        metadata,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Reads every `*.csv` report in `dir` (sorted by name).
pub fn aggregate(dir: &Path) -> Result<Vec<ReportRow>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv") && p.file_stem().is_some_and(|s| s != "aggregate")
        })
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(from_csv(&fs::read_to_string(&p)?)?);
    }
    Ok(rows)
}
