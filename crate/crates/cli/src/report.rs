//! Check records and their CSV/JSON serialisation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qfk_core::semigroup::ConvergenceTable;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    AtMost {
        bound: f64,
    },
    AtLeast {
        bound: f64,
    },
    Within {
        lo: f64,
        hi: f64,
    },
    /// Every error in a convergence table is at round-off level.
    Exact {
        tol: f64,
    },
}

impl Target {
    pub fn describe(&self) -> String {
        match self {
            Target::AtMost { bound } => format!("<= {bound:e}"),
            Target::AtLeast { bound } => format!(">= {bound:e}"),
            Target::Within { lo, hi } => format!("in [{lo}, {hi}]"),
            Target::Exact { tol } => format!("exact (<= {tol:e})"),
        }
    }

    fn accepts(&self, observed: f64) -> bool {
        match *self {
            Target::AtMost { bound } | Target::Exact { tol: bound } => observed <= bound,
            Target::AtLeast { bound } => observed >= bound,
            Target::Within { lo, hi } => (lo..=hi).contains(&observed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub anchor: &'static str,
    pub observed: f64,
    pub target: Target,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check: impl Into<String>, anchor: &'static str, observed: f64, target: Target) -> Self {
        let pass = target.accepts(observed);
        Self { check: check.into(), anchor, observed, target, pass }
    }

    pub fn at_most(check: impl Into<String>, anchor: &'static str, observed: f64, bound: f64) -> Self {
        Self::new(check, anchor, observed, Target::AtMost { bound })
    }

    pub fn at_least(check: impl Into<String>, anchor: &'static str, observed: f64, bound: f64) -> Self {
        Self::new(check, anchor, observed, Target::AtLeast { bound })
    }

    pub fn within(check: impl Into<String>, anchor: &'static str, observed: f64, lo: f64, hi: f64) -> Self {
        Self::new(check, anchor, observed, Target::Within { lo, hi })
    }

    /// One line naming the anchor and the observed-vs-target pair.
    pub fn summary(&self) -> String {
        format!(
            "{} {} [{}]: observed {:e}, target {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.anchor,
            self.observed,
            self.target.describe()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSection {
    pub name: String,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<Option<f64>>,
    pub exact: bool,
}

impl ConvergenceSection {
    pub fn new(name: impl Into<String>, table: &ConvergenceTable) -> Self {
        Self {
            name: name.into(),
            h: table.h.clone(),
            errors: table.errors.clone(),
            orders: table.orders.clone(),
            exact: table.is_exact(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub preset: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceSection>,
    pub all_pass: bool,
}

impl RunReport {
    pub fn new(command: &'static str, preset: String, seed: u64, config: BTreeMap<String, String>) -> Self {
        Self {
            tool: "qfk",
            version: env!("CARGO_PKG_VERSION"),
            command,
            preset,
            seed,
            config,
            checks: Vec::new(),
            convergence: Vec::new(),
            all_pass: true,
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.all_pass &= record.pass;
        self.checks.push(record);
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, check: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == check)
    }

    /// `check,anchor,observed,target,pass` with LF line endings.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["check", "anchor", "observed", "target", "pass"])?;
        for c in &self.checks {
            w.write_record([
                c.check.as_str(),
                c.anchor,
                &format!("{:e}", c.observed),
                &c.target.describe(),
                if c.pass { "true" } else { "false" },
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`, returning both paths.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&csv_path, self.to_csv()?).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
        std::fs::write(&json_path, self.to_json()?)
            .map_err(|e| CliError::Io(format!("{}: {e}", json_path.display())))?;
        Ok((csv_path, json_path))
    }
}
