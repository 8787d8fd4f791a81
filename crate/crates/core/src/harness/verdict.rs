//! Pass/fail records of an experiment and their text form.

use super::config::Experiment;
use crate::error::{NsasError, Result};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    /// Process exit code: 0 pass, 1 fail, 2 error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `in [-0.65, -0.35]`.
    pub condition: String,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            condition: format!("in [{}, {}]", target - tol, target + tol),
            pass: (value - target).abs() <= tol,
        }
    }

    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Check {
            name: name.into(),
            value,
            condition: format!("<= {max}"),
            pass: value <= max,
        }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Check {
            name: name.into(),
            value,
            condition: format!(">= {min}"),
            pass: value >= min,
        }
    }
}

/// An error tagged with the experiment phase it came from.
#[derive(Debug)]
pub struct PhaseError {
    pub phase: &'static str,
    pub source: NsasError,
}

impl fmt::Display for PhaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase `{}`: {}", self.phase, self.source)
    }
}

impl std::error::Error for PhaseError {}

pub(crate) trait InPhase<T> {
    fn phase(self, phase: &'static str) -> std::result::Result<T, PhaseError>;
}

impl<T> InPhase<T> for Result<T> {
    fn phase(self, phase: &'static str) -> std::result::Result<T, PhaseError> {
        self.map_err(|source| PhaseError { phase, source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub experiment: Experiment,
    pub status: Status,
    pub checks: Vec<Check>,
    /// Measured values reported without a pass condition.
    pub info: Vec<(String, f64)>,
    pub error: Option<String>,
}

impl Verdict {
    pub fn new(experiment: Experiment) -> Self {
        Verdict {
            experiment,
            status: Status::Pass,
            checks: Vec::new(),
            info: Vec::new(),
            error: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, name: &str, value: f64) {
        self.info.push((name.into(), value));
    }

    pub fn fail_with(&mut self, err: &PhaseError) {
        self.error = Some(err.to_string());
    }

    /// Error if any phase failed, otherwise pass only when every check passed.
    pub fn finalize(&mut self) {
        self.status = if self.error.is_some() {
            Status::Error
        } else if self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "experiment = {}\nstatus = {}\n",
            self.experiment, self.status
        );
        if let Some(e) = &self.error {
            s += &format!("error = {e}\n");
        }
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            s += &format!(
                "check.{} = {:.6e} {tag} ({})\n",
                c.name, c.value, c.condition
            );
        }
        for (k, v) in &self.info {
            s += &format!("info.{k} = {v:.6e}\n");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
