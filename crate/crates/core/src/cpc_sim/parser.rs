//! Turning raw bit records into outcomes. Which policy applies is itself a
//! guess; the same bits give different outcome records under different
//! policies.

use serde::{Deserialize, Serialize};

use super::{BitRecord, CpcError, DetectorShape, Result};
use crate::qm_model::OutcomeRecord;
use crate::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParsePolicy {
    /// Each of the `L·K` bits is an outcome valued 0 or 1.
    PerBit,
    /// The whole record is one outcome: its bits read as a binary integer,
    /// time-major, most significant bit first.
    PerRecord,
    /// Each detector gives one outcome: its `K` bits read as an integer,
    /// earliest interval most significant.
    PerDetector,
}

impl std::str::FromStr for ParsePolicy {
    type Err = CpcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-bit" => Ok(Self::PerBit),
            "per-record" => Ok(Self::PerRecord),
            "per-detector" => Ok(Self::PerDetector),
            other => Err(CpcError::Config(format!("unknown parser policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeParser {
    pub policy: ParsePolicy,
    pub shape: DetectorShape,
}

fn as_integer(bits: impl Iterator<Item = bool>) -> f64 {
    bits.fold(0.0, |acc, b| 2.0 * acc + if b { 1.0 } else { 0.0 })
}

impl OutcomeParser {
    pub fn new(policy: ParsePolicy, shape: DetectorShape) -> Self {
        Self { policy, shape }
    }

    /// Outcome values carried by one record.
    pub fn outcomes(&self, record: &BitRecord) -> Result<Vec<f64>> {
        if record.shape != self.shape || record.bits.len() != self.shape.bits() {
            return Err(CpcError::BadRecordShape {
                expected: self.shape.bits(),
                found: record.bits.len(),
            });
        }
        let shape = self.shape;
        Ok(match self.policy {
            ParsePolicy::PerBit => record.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            ParsePolicy::PerRecord => vec![as_integer(record.bits.iter().copied())],
            ParsePolicy::PerDetector => (0..shape.detectors)
                .map(|l| as_integer((0..shape.intervals).map(|t| record.bit(l, t))))
                .collect(),
        })
    }

    /// Adds the outcomes of `records`, all produced with command `b`.
    pub fn parse_into(&self, record: &mut OutcomeRecord, b: &Command, records: &[BitRecord]) -> Result<()> {
        for r in records {
            for lambda in self.outcomes(r)? {
                record.push(b.clone(), lambda);
            }
        }
        Ok(())
    }

    pub fn parse(&self, b: &Command, records: &[BitRecord]) -> Result<OutcomeRecord> {
        let mut out = OutcomeRecord::new();
        self.parse_into(&mut out, b, records)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(shape: DetectorShape, bits: &[u8]) -> BitRecord {
        BitRecord::new(shape, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn single_bit_policies_coincide() {
        let shape = DetectorShape::new(1, 1).unwrap();
        let b = Command::from_binary("0").unwrap();
        let records = vec![rec(shape, &[1]), rec(shape, &[0]), rec(shape, &[1])];
        let parsed: Vec<OutcomeRecord> = [ParsePolicy::PerBit, ParsePolicy::PerRecord, ParsePolicy::PerDetector]
            .iter()
            .map(|&p| OutcomeParser::new(p, shape).parse(&b, &records).unwrap())
            .collect();
        assert_eq!(parsed[0], parsed[1]);
        assert_eq!(parsed[1], parsed[2]);
        assert_eq!(parsed[0].total(&b), 3);
    }

    #[test]
    fn outcome_counts_per_policy() {
        let shape = DetectorShape::new(2, 3).unwrap();
        // interval 0: (1,0), interval 1: (0,1), interval 2: (1,1)
        let r = rec(shape, &[1, 0, 0, 1, 1, 1]);
        let per_bit = OutcomeParser::new(ParsePolicy::PerBit, shape).outcomes(&r).unwrap();
        assert_eq!(per_bit.len(), 6);
        let per_record = OutcomeParser::new(ParsePolicy::PerRecord, shape).outcomes(&r).unwrap();
        assert_eq!(per_record, vec![0b100111 as f64]);
        let per_detector = OutcomeParser::new(ParsePolicy::PerDetector, shape)
            .outcomes(&r)
            .unwrap();
        assert_eq!(per_detector, vec![0b101 as f64, 0b011 as f64]);
    }

    #[test]
    fn empty_and_misshapen_input() {
        let shape = DetectorShape::new(2, 1).unwrap();
        let parser = OutcomeParser::new(ParsePolicy::PerBit, shape);
        let b = Command::from_binary("1").unwrap();
        assert!(parser.parse(&b, &[]).unwrap().is_empty());
        let wrong = rec(DetectorShape::new(3, 1).unwrap(), &[0, 0, 1]);
        assert!(matches!(
            parser.parse(&b, &[wrong]),
            Err(CpcError::BadRecordShape { .. })
        ));
    }
}
