use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-open interval `[start_ms, end_ms)` in integer milliseconds.
///
/// All time arithmetic in the workspace happens at 1 ms resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpan", into = "RawSpan")]
pub struct TimeSpan {
    start_ms: u64,
    end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("span start {start} must be before end {end}")]
    Empty { start: u64, end: u64 },
    #[error("malformed span {0:?}, expected START_END in milliseconds")]
    Malformed(String),
}

impl TimeSpan {
    pub fn new(start_ms: u64, end_ms: u64) -> Result<Self, SpanError> {
        if start_ms >= end_ms {
            return Err(SpanError::Empty { start: start_ms, end: end_ms });
        }
        Ok(Self { start_ms, end_ms })
    }

    pub fn start_ms(&self) -> u64 {
        self.start_ms
    }

    pub fn end_ms(&self) -> u64 {
        self.end_ms
    }

    pub fn len_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }

    pub fn overlaps(&self, other: &TimeSpan) -> bool {
        self.start_ms < other.end_ms && other.start_ms < self.end_ms
    }

    pub fn contains_span(&self, other: &TimeSpan) -> bool {
        self.start_ms <= other.start_ms && other.end_ms <= self.end_ms
    }
}

impl fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.start_ms, self.end_ms)
    }
}

impl FromStr for TimeSpan {
    type Err = SpanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || SpanError::Malformed(s.to_string());
        let (a, b) = s.split_once('_').ok_or_else(malformed)?;
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit());
        if !digits(a) || !digits(b) {
            return Err(malformed());
        }
        let start = a.parse().map_err(|_| malformed())?;
        let end = b.parse().map_err(|_| malformed())?;
        TimeSpan::new(start, end)
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpan {
    start_ms: u64,
    end_ms: u64,
}

impl TryFrom<RawSpan> for TimeSpan {
    type Error = SpanError;

    fn try_from(raw: RawSpan) -> Result<Self, Self::Error> {
        TimeSpan::new(raw.start_ms, raw.end_ms)
    }
}

impl From<TimeSpan> for RawSpan {
    fn from(span: TimeSpan) -> Self {
        RawSpan { start_ms: span.start_ms, end_ms: span.end_ms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_reversed() {
        assert!(TimeSpan::new(0, 0).is_err());
        assert!(TimeSpan::new(5, 4).is_err());
        assert!(TimeSpan::new(0, 1).is_ok());
    }

    #[test]
    fn text_form() {
        let span: TimeSpan = "1000_2000".parse().unwrap();
        assert_eq!(span, TimeSpan::new(1000, 2000).unwrap());
        assert_eq!(span.to_string(), "1000_2000");
        for bad in ["", "_", "1_", "+1_2", "1 _2", "2_1", "a_b", "1_2_3"] {
            assert!(bad.parse::<TimeSpan>().is_err(), "{bad}");
        }
    }

    #[test]
    fn overlap_is_half_open() {
        let a = TimeSpan::new(0, 10).unwrap();
        let b = TimeSpan::new(10, 20).unwrap();
        assert!(!a.overlaps(&b));
        assert!(a.overlaps(&TimeSpan::new(9, 11).unwrap()));
    }
}
