//! Report-emitting driver for the sticky-lab analyses.

pub mod commands;
pub mod config;
pub mod json;
pub mod suite;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use std::path::Path;

pub use config::ExperimentConfig;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Fails = 1,
    Inconclusive = 2,
    Usage = 3,
}

/// A CSV sidecar: header row plus string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }
}

pub struct Run {
    pub report: Value,
    pub status: Status,
    pub tables: Vec<Table>,
}

impl Run {
    pub fn json(&self) -> String {
        json::canonical(&self.report)
    }
}

fn header(
    cfg: &ExperimentConfig,
    sched: &sticky_lab::funcspace::ResolutionSchedule,
    tables: &[Table],
) -> Value {
    let sidecars: Vec<String> = match &cfg.csv_dir {
        Some(d) => tables
            .iter()
            .map(|t| d.join(&t.name).display().to_string())
            .collect(),
        None => Vec::new(),
    };
    json!({
        "tool": "sticky-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "config": json::to_value(cfg),
        "schedule": json::to_value(sched),
        "design": {
            "ls_index_origin": 0,
            "upcrossing_inequalities": "strict",
            "fails_rule": "violation density >= 1/2 on (n_max/4, n_max] and (n_max, 2 n_max]",
            "nonfinite_floats": "null",
        },
        "tables": sidecars,
    })
}

/// Validates `cfg` and runs it; errors are usage or configuration errors.
pub fn run(cfg: &ExperimentConfig) -> Result<Run> {
    cfg.validate()?;
    let sched = cfg.resolution()?;
    let out = commands::dispatch(cfg, &sched)?;
    let report = json!({ "header": header(cfg, &sched, &out.tables), "body": out.body, "status": out.status as i32 });
    Ok(Run {
        report,
        status: out.status,
        tables: out.tables,
    })
}

/// Writes the report to `cfg.out` (stdout when absent) and the sidecars to `cfg.csv_dir`.
pub fn emit(cfg: &ExperimentConfig, run: &Run) -> Result<()> {
    match &cfg.out {
        Some(p) => {
            std::fs::write(p, run.json()).with_context(|| format!("writing {}", p.display()))?
        }
        None => print!("{}", run.json()),
    }
    if let Some(dir) = &cfg.csv_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for t in &run.tables {
            let p: &Path = &dir.join(&t.name);
            std::fs::write(p, t.to_csv()?).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    Ok(())
}
