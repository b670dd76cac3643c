use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use crate::error::{Error, Result};

/// One named invariant and whether it held.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

/// Everything a subcommand produces.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
    pub checks: Vec<Check>,
    /// Extra provenance for stochastic runs (seed, nTraj, profile hash).
    pub provenance: Value,
}

impl Outcome {
    pub fn new(header: &[&str]) -> Self {
        Outcome { header: header.iter().map(|s| s.to_string()).collect(), result: Value::Null, ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Formats a float so that artifacts are byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug)]
pub struct Written {
    pub dir: PathBuf,
    pub passed: bool,
}

fn io(e: impl std::fmt::Display, path: &Path) -> Error {
    Error::ConfigInvalid(format!("cannot write {}: {e}", path.display()))
}

/// Creates `<out>/<sub>/<timestamp>` with a numeric suffix on collision.
fn run_dir(out: &Path, sub: &str) -> Result<(PathBuf, String)> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let base = out.join(sub);
    std::fs::create_dir_all(&base).map_err(|e| io(e, &base))?;
    for n in 0.. {
        let name = if n == 0 { stamp.clone() } else { format!("{stamp}-{n}") };
        let dir = base.join(&name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok((dir, stamp)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(io(e, &dir)),
        }
    }
    unreachable!()
}

pub fn write_artifacts(sub: &str, argv: &[String], config: &RunConfig, outcome: &Outcome) -> Result<Written> {
    let (dir, stamp) = run_dir(&config.out, sub)?;
    let csv_path = dir.join("result.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| io(e, &csv_path))?;
    w.write_record(&outcome.header).map_err(|e| io(e, &csv_path))?;
    for r in &outcome.rows {
        w.write_record(r).map_err(|e| io(e, &csv_path))?;
    }
    w.flush().map_err(|e| io(e, &csv_path))?;

    let meta = json!({
        "subcommand": sub,
        "argv": argv,
        "timestamp": stamp,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config.as_map(),
        "provenance": outcome.provenance,
        "result": outcome.result,
    });
    let summary = json!({
        "subcommand": sub,
        "status": if outcome.passed() { "PASS" } else { "FAIL" },
        "checks": outcome.checks,
        "config": config.as_map(),
    });
    for (name, v) in [("meta.json", meta), ("summary.json", summary)] {
        let p = dir.join(name);
        let text = serde_json::to_string_pretty(&v).map_err(|e| io(e, &p))?;
        std::fs::write(&p, text + "\n").map_err(|e| io(e, &p))?;
    }
    Ok(Written { dir, passed: outcome.passed() })
}
