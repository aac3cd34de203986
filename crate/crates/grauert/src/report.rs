//! Experiment result records: per-lambda tables, fitted exponents with
//! standard errors, and pass/fail checks against configured thresholds.
//! Reports serialize to JSON; tables additionally go out as CSV.

use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    /// Serialized config; re-parses to an equal config (round-trip tested).
    pub config_snapshot: String,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub fits: Vec<FitResult>,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str, config_snapshot: String, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_snapshot,
            seed,
            tables: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_fit(&mut self, name: &str, value: f64, stderr: f64, target: f64, tolerance: f64) {
        self.fits.push(FitResult {
            name: name.to_string(),
            value,
            stderr,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        });
    }

    pub fn push_check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(CheckResult { name: name.to_string(), pass, detail });
    }

    pub fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    pub fn passed(&self) -> bool {
        self.fits.iter().all(|f| f.pass) && self.checks.iter().all(|c| c.pass)
    }

    /// Write `<dir>/<experiment>.json` plus one CSV per table.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(dir.join(format!("{}.json", self.experiment)), json)?;
        for table in &self.tables {
            let cols: Vec<&str> = table.columns.iter().map(|s| s.as_str()).collect();
            crate::csvio::write_csv(
                &dir.join(format!("{}_{}.csv", self.experiment, table.name)),
                &cols,
                &table.rows,
            )?;
        }
        Ok(())
    }

    /// One line per check/fit, for terminal output.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for f in &self.fits {
            lines.push(format!(
                "[{}] {}: value {:.6} (stderr {:.2e}) vs target {:.6} +- {:.3}",
                if f.pass { "pass" } else { "FAIL" },
                f.name,
                f.value,
                f.stderr,
                f.target,
                f.tolerance
            ));
        }
        for c in &self.checks {
            lines.push(format!(
                "[{}] {}: {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        lines
    }
}
