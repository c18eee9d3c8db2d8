use std::fmt;

use serde::{Deserialize, Serialize};

/// Validation rule identifiers.
///
/// Each variant is exactly one rule of the validation table; `W008` is the
/// warning-severity form of the span ordering rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagCode {
    /// Missing or misplaced `@Begin` / `@End` framing.
    E001,
    /// Missing `@Participants`, or one that declares nobody.
    E002,
    /// Mainline speaker undeclared or malformed.
    E003,
    /// Malformed dependent tier: bad code, empty content, or bad reserved-tier payload.
    E004,
    /// Missing, duplicate or misplaced terminator.
    E005,
    /// Dependent tier with no preceding mainline.
    E006,
    /// Malformed, unknown, duplicate or out-of-place header.
    E007,
    /// Utterance spans go backwards in time.
    W008,
    /// Reference to something that does not exist.
    E009,
    /// Malformed XML.
    E010,
    /// XML that violates the SLA-XML schema.
    E011,
    /// Unknown code in view criteria.
    E012,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagCode::E001 => "E001",
            DiagCode::E002 => "E002",
            DiagCode::E003 => "E003",
            DiagCode::E004 => "E004",
            DiagCode::E005 => "E005",
            DiagCode::E006 => "E006",
            DiagCode::E007 => "E007",
            DiagCode::W008 => "W008",
            DiagCode::E009 => "E009",
            DiagCode::E010 => "E010",
            DiagCode::E011 => "E011",
            DiagCode::E012 => "E012",
        }
    }

    pub fn severity(&self) -> Severity {
        match self {
            DiagCode::W008 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagCode,
    /// 1-based line in the text the diagnostic refers to; for documents, the
    /// line in their canonical serialization. 0 when no line applies.
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl Diagnostic {
    pub fn new(code: DiagCode, line: usize, message: impl Into<String>) -> Self {
        Self { code, line, message: message.into(), severity: code.severity() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} line {}: {}", self.code, self.line, self.message)
    }
}

impl std::error::Error for Diagnostic {}

pub(crate) fn sort_diagnostics(diags: &mut Vec<Diagnostic>) {
    diags.sort_by(|a, b| (a.line, a.code, &a.message).cmp(&(b.line, b.code, &b.message)));
    diags.dedup();
}
