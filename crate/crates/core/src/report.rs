//! Axiom-check reports.
//!
//! Validators collect one entry per failed axiom, recording the axiom name and
//! the first offending basis multi-index. Reports serialize as
//! `{"pass": bool, "failures": [{"axiom", "index"}], "flags": [...]}`.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub axiom: String,
    pub index: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub pass: bool,
    pub failures: Vec<Failure>,
    pub flags: Vec<String>,
}

impl Report {
    pub fn new() -> Report {
        Report {
            pass: true,
            failures: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn fail(&mut self, axiom: impl Into<String>, index: Vec<usize>) {
        self.pass = false;
        self.failures.push(Failure {
            axiom: axiom.into(),
            index,
        });
    }

    pub fn flag(&mut self, flag: impl Into<String>) {
        self.flags.push(flag.into());
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// True when some failure's axiom name starts with `prefix`.
    pub fn failed(&self, prefix: &str) -> bool {
        self.failures.iter().any(|f| f.axiom.starts_with(prefix))
    }

    pub fn absorb(&mut self, other: Report) {
        self.pass &= other.pass;
        self.failures.extend(other.failures);
        for fl in other.flags {
            if !self.has_flag(&fl) {
                self.flags.push(fl);
            }
        }
    }

    /// Absorbs `other` with every axiom name prefixed by `prefix.`.
    pub fn absorb_under(&mut self, prefix: &str, other: Report) {
        self.pass &= other.pass;
        for f in other.failures {
            self.failures.push(Failure {
                axiom: format!("{prefix}.{}", f.axiom),
                index: f.index,
            });
        }
        for fl in other.flags {
            if !self.has_flag(&fl) {
                self.flags.push(fl);
            }
        }
    }
}

impl Default for Report {
    fn default() -> Self {
        Report::new()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            write!(f, "pass")?;
        } else {
            writeln!(f, "FAIL ({} axiom violations)", self.failures.len())?;
            for fail in &self.failures {
                writeln!(f, "  {:<40} at index {:?}", fail.axiom, fail.index)?;
            }
        }
        if !self.flags.is_empty() {
            write!(f, " [{}]", self.flags.join(", "))?;
        }
        Ok(())
    }
}
