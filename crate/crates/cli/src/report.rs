//! Run reports: execution of a planned suite, JSON/CSV output and
//! reproduction of a stored report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::checks::{self, BuiltModel, RunContext, Status, Table};
use crate::config::{ExperimentConfig, PlannedCheck};
use crate::error::CliError;

/// Bumped whenever the report layout changes.
pub const REPORT_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub format_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub op: String,
    pub anchor: String,
    pub status: Status,
    pub tolerance: f64,
    pub payload: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub table: Option<Table>,
    /// Set when the check could not be executed.
    pub error: Option<String>,
    pub wall_clock_s: f64,
}

impl RunReport {
    /// 0 when every non-flagged check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().all(|c| c.status != Status::Fail) {
            0
        } else {
            1
        }
    }
}

pub struct Pools {
    pub parallel: ThreadPool,
    pub sequential: ThreadPool,
}

impl Pools {
    /// `jobs = None` uses one worker per core.
    pub fn new(jobs: Option<usize>) -> Result<Self, CliError> {
        let build = |n: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))
        };
        Ok(Self { parallel: build(jobs.unwrap_or(0))?, sequential: build(1)? })
    }
}

/// Execute the suite in declared order.
pub fn execute_suite(config: &ExperimentConfig, out_dir: &Path, pools: &Pools) -> Result<RunReport, CliError> {
    let plan = config.plan()?;
    let model = BuiltModel::build(&config.model).map_err(|e| CliError::config(format!("model: {e}")))?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", out_dir.display())))?;
    let checks = plan.iter().map(|p| run_check(p, &model, out_dir, pools)).collect();
    Ok(RunReport {
        format_version: REPORT_FORMAT,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        config: config.clone(),
        warnings: model.warnings(),
        checks,
    })
}

fn run_check(plan: &PlannedCheck, model: &BuiltModel, out_dir: &Path, pools: &Pools) -> CheckRecord {
    let info = checks::lookup(plan.op).expect("planned checks are registered");
    let ctx = RunContext { model, out_dir, name: &plan.name, tolerance: plan.tolerance };
    let pool = if info.parallel { &pools.parallel } else { &pools.sequential };
    let start = Instant::now();
    let result = pool.install(|| checks::execute(&plan.params, &ctx));
    let wall_clock_s = start.elapsed().as_secs_f64();
    let mut record = CheckRecord {
        name: plan.name.clone(),
        op: plan.op.to_string(),
        anchor: info.anchor.to_string(),
        status: Status::Fail,
        tolerance: plan.tolerance,
        payload: BTreeMap::new(),
        notes: Vec::new(),
        table: None,
        error: None,
        wall_clock_s,
    };
    match result {
        Ok(out) => {
            record.status = out.status;
            record.payload = out.payload;
            record.notes = out.notes;
            record.table = out.table;
        }
        Err(e) => {
            eprintln!("check {:?} failed: {e}", plan.name);
            record.error = Some(e.to_string());
        }
    }
    record
}

fn format_number(v: f64) -> String {
    // Shortest round-trip representation, stable across runs.
    format!("{v}")
}

/// CSV for one check: a comment line with the config hash, then the
/// check's table, or its payload as key/value rows.
pub fn check_csv(record: &CheckRecord, config_hash: &str) -> Result<Vec<u8>, CliError> {
    let mut buf = format!("# config_hash: {config_hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| CliError::Output(e.to_string());
        match &record.table {
            Some(t) => {
                w.write_record(&t.columns).map_err(io)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(|v| format_number(*v))).map_err(io)?;
                }
            }
            None => {
                w.write_record(["key", "value"]).map_err(io)?;
                for (k, v) in &record.payload {
                    w.write_record([k.clone(), format_number(*v)]).map_err(io)?;
                }
            }
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    }
    Ok(buf)
}

pub fn write_outputs(report: &RunReport, out_dir: &Path, format: OutputFormat) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output(e.to_string());
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        for c in &report.checks {
            fs::write(out_dir.join(format!("{}.csv", c.name)), check_csv(c, &report.config_hash)?).map_err(io)?;
        }
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Output(e.to_string()))?;
        fs::write(out_dir.join("report.json"), text + "\n").map_err(io)?;
    }
    Ok(())
}

pub fn load_report(path: &Path) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Report(format!("cannot read {}: {e}", path.display())))?;
    let report: RunReport =
        serde_json::from_str(&text).map_err(|e| CliError::Report(format!("corrupted report: {e}")))?;
    if report.format_version != REPORT_FORMAT {
        return Err(CliError::Report(format!(
            "report format {} is not supported (expected {REPORT_FORMAT})",
            report.format_version
        )));
    }
    let ours = env!("CARGO_PKG_VERSION");
    if report.tool_version != ours {
        return Err(CliError::Report(format!("report written by version {}, this is {ours}", report.tool_version)));
    }
    Ok(report)
}

fn close(stored: f64, fresh: f64, tol: f64) -> bool {
    (stored - fresh).abs() <= tol * stored.abs().max(1.0)
}

/// Differences between a stored record and a fresh one, judged with the
/// fresh record's tolerance.
pub fn diff_records(stored: &CheckRecord, fresh: &CheckRecord) -> Vec<String> {
    let mut out = Vec::new();
    let tol = fresh.tolerance;
    if stored.name != fresh.name || stored.op != fresh.op {
        out.push(format!("check {:?} ({}) became {:?} ({})", stored.name, stored.op, fresh.name, fresh.op));
        return out;
    }
    if stored.status != fresh.status {
        out.push(format!("{}: status {:?} -> {:?}", stored.name, stored.status, fresh.status));
    }
    if stored.error != fresh.error {
        out.push(format!("{}: error {:?} -> {:?}", stored.name, stored.error, fresh.error));
    }
    let keys: std::collections::BTreeSet<&String> = stored.payload.keys().chain(fresh.payload.keys()).collect();
    for k in keys {
        match (stored.payload.get(k), fresh.payload.get(k)) {
            (Some(a), Some(b)) if close(*a, *b, tol) => {}
            (a, b) => out.push(format!("{}: {k} {a:?} -> {b:?}", stored.name)),
        }
    }
    match (&stored.table, &fresh.table) {
        (None, None) => {}
        (Some(a), Some(b)) if a.columns == b.columns && a.rows.len() == b.rows.len() => {
            for (i, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
                if ra.len() != rb.len() || ra.iter().zip(rb).any(|(x, y)| !close(*x, *y, tol)) {
                    out.push(format!("{}: table row {i} differs", stored.name));
                }
            }
        }
        _ => out.push(format!("{}: table layout differs", stored.name)),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(v: f64) -> CheckRecord {
        CheckRecord {
            name: "x".into(),
            op: "verify_identity_a".into(),
            anchor: "a".into(),
            status: Status::Pass,
            tolerance: 1e-12,
            payload: BTreeMap::from([("residual".to_string(), v)]),
            notes: vec![],
            table: Some(Table { columns: vec!["a".into(), "b".into()], rows: vec![vec![1.0, v]] }),
            error: None,
            wall_clock_s: 0.0,
        }
    }

    #[test]
    fn identical_records_have_no_diff() {
        assert!(diff_records(&record(0.5), &record(0.5)).is_empty());
    }

    #[test]
    fn payload_drift_is_reported() {
        let d = diff_records(&record(0.5), &record(0.5 + 1e-9));
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn csv_has_hash_comment_and_quotes() {
        let mut r = record(0.25);
        r.table = Some(Table { columns: vec!["a,b".into()], rows: vec![vec![2.0]] });
        let text = String::from_utf8(check_csv(&r, "abc").unwrap()).unwrap();
        assert_eq!(text, "# config_hash: abc\n\"a,b\"\n2\n");
    }
}
