use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numerics::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when `value <= limit`.
    Residual,
    /// Passes when `value >= -limit`.
    Floor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub kind: CheckKind,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.kind {
            CheckKind::Residual => self.value <= self.limit,
            CheckKind::Floor => self.value >= -self.limit,
        }
    }
}

/// Named residuals and eigenvalue floors with their thresholds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// Free-form remarks, e.g. that a positivity result is sampled only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a nonnegative residual checked against `residual_tol`.
    pub fn residual(&mut self, name: &str, value: f64, tol: &Tolerances) -> &mut Self {
        self.push(name, value.abs(), CheckKind::Residual, tol.residual_tol)
    }

    /// Records an eigenvalue floor checked against `-psd_tol`.
    pub fn floor(&mut self, name: &str, value: f64, tol: &Tolerances) -> &mut Self {
        self.push(name, value, CheckKind::Floor, tol.psd_tol)
    }

    pub fn push(&mut self, name: &str, value: f64, kind: CheckKind, limit: f64) -> &mut Self {
        // NaN never passes; infinities are clamped so reports stay valid JSON
        let value = if value.is_nan() {
            f64::MAX
        } else {
            value.clamp(-f64::MAX, f64::MAX)
        };
        self.checks.push(Check {
            name: name.to_string(),
            value,
            kind,
            limit,
        });
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn merge(&mut self, prefix: &str, other: VerificationReport) -> &mut Self {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
        self.notes.extend(other.notes);
        self
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let rel = match c.kind {
                CheckKind::Residual => "<=",
                CheckKind::Floor => ">= -",
            };
            writeln!(
                f,
                "  {:<28} {:>12.3e}  ({} {:.1e})  {}",
                c.name,
                c.value,
                rel,
                c.limit,
                if c.passed() { "ok" } else { "FAIL" }
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "  => {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}
