//! Run-length descriptions of trajectory shapes.
//!
//! A [`Pattern`] is a target shape: rise for `v_1` steps, fall for `v_2`,
//! rise for `v_3`, and so on. A [`PatternRle`] is what was actually observed
//! along a trajectory, which may start in either direction.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern must contain at least one run")]
    Empty,
    #[error("run length must be ≥ 1 (run {index} is 0)")]
    ZeroRun { index: usize },
    #[error("malformed run length {token:?} at position {index}")]
    Malformed { index: usize, token: String },
}

/// Alternating run lengths `v_1, v_2, ...`; odd-numbered runs increase,
/// even-numbered runs decrease.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    runs: Vec<u32>,
}

impl Pattern {
    pub fn new(runs: Vec<u32>) -> Result<Self, PatternError> {
        if runs.is_empty() {
            return Err(PatternError::Empty);
        }
        if let Some(index) = runs.iter().position(|&v| v == 0) {
            return Err(PatternError::ZeroRun { index });
        }
        Ok(Self { runs })
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    /// Number of runs.
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Total number of steps the pattern constrains.
    pub fn total_steps(&self) -> u64 {
        self.runs.iter().map(|&v| u64::from(v)).sum()
    }

    /// Direction of the run at zero-based `index`.
    pub fn direction_of(index: usize) -> Direction {
        if index.is_multiple_of(2) {
            Direction::Increasing
        } else {
            Direction::Decreasing
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.runs.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses comma-separated decimal run lengths with no spaces, e.g. `1,2,3`.
impl FromStr for Pattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(PatternError::Empty);
        }
        let mut runs = Vec::new();
        for (index, token) in s.split(',').enumerate() {
            if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
                return Err(PatternError::Malformed {
                    index,
                    token: token.to_string(),
                });
            }
            let v: u32 = token.parse().map_err(|_| PatternError::Malformed {
                index,
                token: token.to_string(),
            })?;
            runs.push(v);
        }
        Self::new(runs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
    Fixed,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
            Direction::Fixed => Direction::Fixed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Fixed => "fixed",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maximal strictly monotone runs observed along a trajectory prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRle {
    pub leading_direction: Direction,
    pub runs: Vec<u64>,
    /// The last run was still going when the step budget ran out.
    pub truncated: bool,
}

impl PatternRle {
    /// Does this observation realize `pattern` over exactly
    /// `pattern.total_steps()` steps? Interior runs must match exactly and the
    /// final run must cover at least the final target run.
    pub fn realizes(&self, pattern: &Pattern) -> bool {
        let target = pattern.runs();
        if self.leading_direction != Direction::Increasing || self.runs.len() != target.len() {
            return false;
        }
        let last = target.len() - 1;
        self.runs[..last]
            .iter()
            .zip(&target[..last])
            .all(|(&got, &want)| got == u64::from(want))
            && self.runs[last] >= u64::from(target[last])
    }
}
