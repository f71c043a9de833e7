use std::path::{Path, PathBuf};

use super::output::Table;
use super::spec::Experiment;
use crate::error::Result;

/// One assertable outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of one experiment: checks, key figures and written artifacts.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: Experiment,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Ordered `(key, value)` pairs written to `summary.csv`.
    pub summary: Vec<(String, String)>,
    pub all_converged: bool,
    pub artifacts: Vec<PathBuf>,
}

impl Report {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Report {
            experiment,
            seed,
            checks: Vec::new(),
            summary: vec![("seed".into(), seed.to_string())],
            all_converged: true,
            artifacts: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn converged(&mut self, ok: bool) {
        self.all_converged &= ok;
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn save_table(&mut self, dir: &Path, name: &str, table: &Table) -> Result<()> {
        let path = dir.join(format!("{name}.csv"));
        table.write(&path)?;
        self.artifacts.push(path);
        Ok(())
    }

    /// Writes `checks.csv` and `summary.csv` into `dir`.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        let mut checks = Table::new(&["check", "passed", "detail"]);
        for c in &self.checks {
            checks.push(vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
        }
        let mut summary = Table::new(&["key", "value"]);
        for (k, v) in &self.summary {
            summary.push(vec![k.clone(), v.clone()]);
        }
        summary.push(vec!["all_converged".into(), self.all_converged.to_string()]);
        self.save_table(dir, "checks", &checks)?;
        self.save_table(dir, "summary", &summary)
    }
}
