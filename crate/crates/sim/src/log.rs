//! Run logs and their CSV form. Floats are written with 17 significant
//! digits so a parse reproduces them exactly; run metadata goes to a
//! `.meta.json` file next to the CSV.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{SimError, SimResult};

/// One Gauss-Newton iterate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IkRecord {
    pub iter: usize,
    pub cost: f64,
    pub constraint_norm: f64,
    pub q: Vec<f64>,
    pub ee1: [f64; 3],
    pub ee2: [f64; 3],
}

/// One plant tick of a receding-horizon run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpcRecord {
    pub tick: usize,
    pub time: f64,
    pub cost: f64,
    pub res_align: f64,
    pub res_axis: f64,
    pub res_dist: f64,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Records {
    Ik(Vec<IkRecord>),
    Mpc(Vec<MpcRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Ik(r) => r.len(),
            Records::Mpc(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    LessThan,
    GreaterThan,
}

/// One acceptance threshold and the value it was compared with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::LessThan => value < threshold,
            Comparison::GreaterThan => value > threshold,
        };
        Self { name: name.into(), value, threshold, comparison, passed }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, threshold)
    }

    pub fn less_than(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::LessThan, threshold)
    }

    pub fn greater_than(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::GreaterThan, threshold)
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::LessThan => "<",
            Comparison::GreaterThan => ">",
        };
        let verdict = if self.passed { "ok" } else { "FAILED" };
        write!(f, "{}: {:.3e} {op} {:.3e} {verdict}", self.name, self.value, self.threshold)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunLog {
    pub scenario: String,
    pub kind: String,
    pub hash: String,
    pub seed: u64,
    /// Solver options used for the run.
    pub options: serde_json::Value,
    /// Joints per arm.
    pub dof: [usize; 2],
    /// Solver termination: `converged`, `completed` or a failure reason.
    pub status: String,
    pub solver_ok: bool,
    pub checks: Vec<Check>,
    pub records: Records,
}

impl RunLog {
    /// Solver success and every acceptance check met.
    pub fn passed(&self) -> bool {
        self.solver_ok && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn header(&self) -> Vec<String> {
        let n = self.dof[0] + self.dof[1];
        let joints = |prefix: &'static str| (1..=n).map(move |i| format!("{prefix}_{i}"));
        match &self.records {
            Records::Ik(_) => ["iter", "cost", "constraint_norm"]
                .iter()
                .map(|s| s.to_string())
                .chain(joints("q"))
                .chain(["ee1_x", "ee1_y", "ee1_z", "ee2_x", "ee2_y", "ee2_z"].iter().map(|s| s.to_string()))
                .collect(),
            Records::Mpc(_) => ["tick", "time_s", "cost", "res_align", "res_axis", "res_dist"]
                .iter()
                .map(|s| s.to_string())
                .chain(joints("q"))
                .chain(joints("dq"))
                .chain(joints("u"))
                .collect(),
        }
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let f = |v: &f64| format_float(*v);
        match &self.records {
            Records::Ik(records) => records
                .iter()
                .map(|r| {
                    [r.iter.to_string(), f(&r.cost), f(&r.constraint_norm)]
                        .into_iter()
                        .chain(r.q.iter().map(f))
                        .chain(r.ee1.iter().chain(&r.ee2).map(f))
                        .collect()
                })
                .collect(),
            Records::Mpc(records) => records
                .iter()
                .map(|r| {
                    [r.tick.to_string(), f(&r.time), f(&r.cost), f(&r.res_align), f(&r.res_axis), f(&r.res_dist)]
                        .into_iter()
                        .chain(r.q.iter().chain(&r.dq).chain(&r.u).map(f))
                        .collect()
                })
                .collect(),
        }
    }

    /// Metadata written next to the CSV.
    pub fn metadata(&self) -> serde_json::Value {
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        serde_json::json!({
            "scenario": self.scenario,
            "kind": self.kind,
            "scenario_hash": self.hash,
            "seed": self.seed,
            "options": self.options,
            "status": self.status,
            "passed": self.passed(),
            "checks": self.checks,
            "rows": self.records.len(),
            "created_unix": created,
        })
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `<stem>.meta.json` beside `csv_path`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    csv_path.with_file_name(format!("{stem}.meta.json"))
}

/// Writes the CSV and its metadata file.
pub fn export_csv(log: &RunLog, path: &Path) -> SimResult<()> {
    let io = |e: std::io::Error| SimError::io(path, e);
    let mut writer = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    writer.write_record(log.header()).map_err(|e| io(e.into()))?;
    for row in log.rows() {
        writer.write_record(&row).map_err(|e| io(e.into()))?;
    }
    writer.flush().map_err(io)?;
    let meta = meta_path(path);
    let text = serde_json::to_string_pretty(&log.metadata()).expect("metadata serializes");
    std::fs::write(&meta, text + "\n").map_err(|e| SimError::io(&meta, e))
}

/// A parsed CSV log.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_csv(path: &Path) -> SimResult<Table> {
    let io = |e: csv::Error| SimError::io(path, e.into());
    let mut reader = csv::Reader::from_path(path).map_err(io)?;
    let header = reader.headers().map_err(io)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(io)?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| SimError::Validation(format!("{}: {s:?}: {e}", path.display()))))
            .collect::<SimResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}
