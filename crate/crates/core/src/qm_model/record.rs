use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{QmError, Result, TOL};
use crate::command::Command;

/// Count of one distinct outcome value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTally {
    pub lambda: f64,
    pub n: u64,
}

/// Per-command tallies of distinct outcome values, in order of first
/// appearance. Serializes as `{command-hex: [{"lambda": x, "n": k}, ...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexMap<Command, Vec<OutcomeTally>>")]
#[serde(into = "IndexMap<Command, Vec<OutcomeTally>>")]
pub struct OutcomeRecord {
    tallies: IndexMap<Command, Vec<OutcomeTally>>,
}

impl OutcomeRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tallies(tallies: IndexMap<Command, Vec<OutcomeTally>>) -> Result<Self> {
        for (b, ts) in &tallies {
            if ts.is_empty() {
                return Err(QmError::InvalidRecord(format!("command {b} has no outcomes")));
            }
            for (i, t) in ts.iter().enumerate() {
                if t.n == 0 {
                    return Err(QmError::InvalidRecord(format!(
                        "outcome {} of command {b} has zero count",
                        i + 1
                    )));
                }
                if !t.lambda.is_finite() {
                    return Err(QmError::InvalidRecord(format!(
                        "outcome {} of command {b} is not finite",
                        i + 1
                    )));
                }
                if ts[..i].iter().any(|s| (s.lambda - t.lambda).abs() <= TOL) {
                    return Err(QmError::InvalidRecord(format!(
                        "duplicate outcome value {} for command {b}",
                        t.lambda
                    )));
                }
            }
        }
        Ok(Self { tallies })
    }

    /// Builds a record from a stream of `(command, outcome value)` entries.
    pub fn from_observations<I>(observations: I) -> Self
    where
        I: IntoIterator<Item = (Command, f64)>,
    {
        let mut record = Self::new();
        for (b, lambda) in observations {
            record.push(b, lambda);
        }
        record
    }

    /// Enters one outcome for `b`. Values within 1e-9 of an existing outcome
    /// are counted as that outcome.
    pub fn push(&mut self, b: Command, lambda: f64) {
        let ts = self.tallies.entry(b).or_default();
        match ts.iter_mut().find(|t| (t.lambda - lambda).abs() <= TOL) {
            Some(t) => t.n += 1,
            None => ts.push(OutcomeTally { lambda, n: 1 }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tallies.is_empty()
    }

    pub fn commands(&self) -> impl Iterator<Item = &Command> {
        self.tallies.keys()
    }

    pub fn tallies(&self, b: &Command) -> Option<&[OutcomeTally]> {
        self.tallies.get(b).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Command, &[OutcomeTally])> {
        self.tallies.iter().map(|(b, t)| (b, t.as_slice()))
    }

    /// `N(b)`
    pub fn total(&self, b: &Command) -> u64 {
        self.tallies.get(b).map_or(0, |ts| ts.iter().map(|t| t.n).sum())
    }

    /// `J(b)`
    pub fn distinct(&self, b: &Command) -> usize {
        self.tallies.get(b).map_or(0, Vec::len)
    }

    pub fn max_distinct(&self) -> usize {
        self.tallies.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Relative frequencies `n(j,b)/N(b)` in outcome order.
    pub fn frequencies(&self, b: &Command) -> Option<Vec<f64>> {
        let ts = self.tallies.get(b)?;
        let total = self.total(b) as f64;
        Some(ts.iter().map(|t| t.n as f64 / total).collect())
    }
}

impl TryFrom<IndexMap<Command, Vec<OutcomeTally>>> for OutcomeRecord {
    type Error = QmError;

    fn try_from(value: IndexMap<Command, Vec<OutcomeTally>>) -> Result<Self> {
        Self::from_tallies(value)
    }
}

impl From<OutcomeRecord> for IndexMap<Command, Vec<OutcomeTally>> {
    fn from(value: OutcomeRecord) -> Self {
        value.tallies
    }
}
