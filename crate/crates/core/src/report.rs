use std::fmt;

use serde::{Deserialize, Serialize};

/// One failed check together with the indices or ids that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub witness: Vec<String>,
    pub detail: String,
}

impl Violation {
    pub fn new(check: impl Into<String>, witness: Vec<String>, detail: impl Into<String>) -> Self {
        Violation {
            check: check.into(),
            witness,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at ({}): {}",
            self.check,
            self.witness.join(","),
            self.detail
        )
    }
}

/// Outcome of a validator. An empty report means every check passed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn fail(
        &mut self,
        check: impl Into<String>,
        witness: Vec<String>,
        detail: impl Into<String>,
    ) {
        self.push(Violation::new(check, witness, detail));
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// Prefixes the check names of another report before merging it.
    pub fn extend_scoped(&mut self, scope: &str, other: ValidationReport) {
        self.violations
            .extend(other.violations.into_iter().map(|mut v| {
                v.check = format!("{scope}.{}", v.check);
                v
            }));
    }

    pub fn has_check(&self, check: &str) -> bool {
        self.violations.iter().any(|v| v.check == check)
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
