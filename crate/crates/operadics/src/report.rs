//! Law-check reports shared by the operad and monad scanners.

use std::fmt;

/// Outcome of an exhaustive law scan. An empty violation list means every
/// checked instance held.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub violations: Vec<LawViolation>,
}

/// One failed law instance, with both evaluations rendered as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawViolation {
    pub law: String,
    pub instance: String,
    pub lhs: String,
    pub rhs: String,
}

impl LawReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn record(
        &mut self,
        law: &str,
        instance: impl Into<String>,
        lhs: impl Into<String>,
        rhs: impl Into<String>,
    ) {
        self.violations.push(LawViolation {
            law: law.to_string(),
            instance: instance.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
        });
    }

    pub fn merge(&mut self, other: LawReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "laws: ok")
        } else {
            writeln!(f, "laws: {} violation(s)", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  {}: {} gives {} vs {}", v.law, v.instance, v.lhs, v.rhs)?;
            }
            Ok(())
        }
    }
}
