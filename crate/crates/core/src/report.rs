//! Verification records: one entry per checked identity.

use crate::error::{Error, Kind, Result};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity being verified, in words.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    pub failure: Kind,
}

#[derive(Clone, Debug, Default)]
pub struct Checks {
    pub items: Vec<Check>,
}

impl Checks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        name: impl Into<String>,
        anchor: impl Into<String>,
        residual: f64,
        tolerance: f64,
        failure: Kind,
    ) -> bool {
        let pass = residual <= tolerance;
        self.items.push(Check {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            pass,
            failure,
        });
        pass
    }

    pub fn extend(&mut self, other: &Checks) {
        self.items.extend(other.items.iter().cloned());
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.items.iter().find(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.items.iter().find(|c| c.name == name)
    }

    /// Largest residual among checks with this name.
    pub fn residual(&self, name: &str) -> f64 {
        self.items
            .iter()
            .filter(|c| c.name == name)
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn ensure(&self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::new(
                c.failure,
                format!(
                    "{} ({}): residual {:.3e} exceeds {:.3e}",
                    c.name, c.anchor, c.residual, c.tolerance
                ),
            )),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

/// Machine-readable outcome of one command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub instance: String,
    pub checks: Vec<Check>,
    pub facts: BTreeMap<String, serde_json::Value>,
    pub errors: Vec<String>,
    pub summary: Summary,
    pub wall_time_ms: f64,
}

pub const REPORT_SCHEMA: &str = "cstar-descent-report/1";

impl Report {
    pub fn new(command: &str, instance: &str) -> Self {
        Report {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            instance: instance.to_string(),
            checks: Vec::new(),
            facts: BTreeMap::new(),
            errors: Vec::new(),
            summary: Summary { total: 0, passed: 0, failed: 0, first_failure: None },
            wall_time_ms: 0.0,
        }
    }

    pub fn add_checks(&mut self, prefix: &str, checks: &Checks) {
        for c in &checks.items {
            let mut c = c.clone();
            if !prefix.is_empty() {
                c.name = format!("{prefix}/{}", c.name);
            }
            self.checks.push(c);
        }
    }

    pub fn fact(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.facts.insert(
            key.into(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
    }

    pub fn error(&mut self, context: &str, e: &Error) {
        self.errors.push(format!("{context}: {e}"));
    }

    pub fn finish(&mut self, wall_time_ms: f64) {
        let failed: Vec<&Check> = self.checks.iter().filter(|c| !c.pass).collect();
        let first = failed
            .first()
            .map(|c| format!("{} [{}]", c.name, c.failure))
            .or_else(|| self.errors.first().cloned());
        self.summary = Summary {
            total: self.checks.len(),
            passed: self.checks.len() - failed.len(),
            failed: failed.len() + self.errors.len(),
            first_failure: first,
        };
        self.wall_time_ms = wall_time_ms;
    }

    pub fn success(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
