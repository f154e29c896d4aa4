use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CpcError, Result};
use crate::qm_model::{Model, QmError};
use crate::Command;

/// `L` detectors each reporting once in each of `K` time intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectorShape {
    pub detectors: usize,
    pub intervals: usize,
}

impl DetectorShape {
    pub fn new(detectors: usize, intervals: usize) -> Result<Self> {
        if detectors == 0 || intervals == 0 {
            return Err(CpcError::InvalidShape(format!("{detectors}x{intervals}")));
        }
        Ok(Self { detectors, intervals })
    }

    pub fn bits(&self) -> usize {
        self.detectors * self.intervals
    }
}

/// Raw result of one use of an instrument, stored time-major: bit
/// `t * L + l` is detector `l` in interval `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitRecord {
    pub shape: DetectorShape,
    pub bits: Vec<bool>,
}

impl BitRecord {
    pub fn new(shape: DetectorShape, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != shape.bits() {
            return Err(CpcError::BadRecordShape {
                expected: shape.bits(),
                found: bits.len(),
            });
        }
        Ok(Self { shape, bits })
    }

    pub fn bit(&self, detector: usize, interval: usize) -> bool {
        self.bits[interval * self.shape.detectors + detector]
    }
}

/// Entry in an instrument's access log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Access {
    pub command: Command,
    pub trials: u64,
}

/// A simulated instrument. Its model is private: callers learn about it only
/// through [`Instrument::measure`], and every call is logged.
pub struct Instrument {
    model: Model,
    rng: ChaCha8Rng,
    shape: DetectorShape,
    log: Vec<Access>,
}

impl std::fmt::Debug for Instrument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instrument")
            .field("shape", &self.shape)
            .field("accesses", &self.log.len())
            .finish_non_exhaustive()
    }
}

impl Instrument {
    /// Outcome `j` (1-based, spectral order) is reported as detector `j - 1`
    /// firing in the final interval, so every measurement needs at most `L`
    /// outcomes.
    pub fn new(model: Model, shape: DetectorShape, seed: u64) -> Result<Self> {
        for (b, m) in model.measurements().iter() {
            if m.len() > shape.detectors {
                return Err(CpcError::InvalidShape(format!(
                    "command {b} has {} outcomes for {} detectors",
                    m.len(),
                    shape.detectors
                )));
            }
        }
        Ok(Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            shape,
            log: Vec::new(),
        })
    }

    pub fn shape(&self) -> DetectorShape {
        self.shape
    }

    pub fn access_log(&self) -> &[Access] {
        &self.log
    }

    pub fn accepts(&self, b: &Command) -> bool {
        self.model.commands().contains(b)
    }

    fn encode(&self, outcome: usize) -> BitRecord {
        let mut bits = vec![false; self.shape.bits()];
        bits[(self.shape.intervals - 1) * self.shape.detectors + outcome] = true;
        BitRecord {
            shape: self.shape,
            bits,
        }
    }

    /// Outcome indices (0-based) of `trials` uses with command `b`.
    pub fn sample_outcomes(&mut self, b: &Command, trials: u64) -> Result<Vec<usize>> {
        if trials == 0 {
            return Err(CpcError::Config("trials must be at least 1".into()));
        }
        let probs = self.model.distribution(b).map_err(|e| match e {
            QmError::CommandNotInSet(c) => CpcError::CommandNotInSet(c),
            other => CpcError::Model(other),
        })?;
        self.log.push(Access {
            command: b.clone(),
            trials,
        });
        let last = probs.len() - 1;
        Ok((0..trials)
            .map(|_| {
                let r: f64 = self.rng.random();
                let mut acc = 0.0;
                for (j, p) in probs.iter().enumerate() {
                    acc += p;
                    if r < acc {
                        return j;
                    }
                }
                last
            })
            .collect())
    }

    pub fn measure(&mut self, b: &Command, trials: u64) -> Result<Vec<BitRecord>> {
        Ok(self
            .sample_outcomes(b, trials)?
            .into_iter()
            .map(|j| self.encode(j))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis, C64};
    use crate::qm_model::{HilbertSpace, MeasurementFn, Spectral, StateFn};
    use indexmap::IndexMap;

    pub(crate) fn coin(p0: f64) -> Model {
        let b = Command::from_binary("1").unwrap();
        let v = basis(2, 0) * C64::new(p0.sqrt(), 0.0) + basis(2, 1) * C64::new((1.0 - p0).sqrt(), 0.0);
        Model::with_identity(
            HilbertSpace::new(2).unwrap(),
            StateFn::new(IndexMap::from([(b.clone(), v)])).unwrap(),
            MeasurementFn::constant([&b], Spectral::diagonal(&[2.0, 1.0]).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn certain_outcome() {
        let b = Command::from_binary("1").unwrap();
        let mut inst = Instrument::new(coin(1.0), DetectorShape::new(2, 3).unwrap(), 1).unwrap();
        let recs = inst.measure(&b, 50).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.bits.len() == 6 && r.bit(0, 2) && r.bits.iter().filter(|x| **x).count() == 1));
        assert_eq!(inst.access_log(), &[Access { command: b, trials: 50 }]);
    }

    #[test]
    fn fair_coin_concentrates() {
        let b = Command::from_binary("1").unwrap();
        let mut inst = Instrument::new(coin(0.5), DetectorShape::new(2, 1).unwrap(), 9).unwrap();
        let ones = inst
            .sample_outcomes(&b, 10_000)
            .unwrap()
            .iter()
            .filter(|&&j| j == 0)
            .count();
        assert!((ones as f64 / 10_000.0 - 0.5).abs() <= 3.0 * 0.005);
    }

    #[test]
    fn seeded_streams_repeat() {
        let b = Command::from_binary("1").unwrap();
        let shape = DetectorShape::new(2, 2).unwrap();
        let a = Instrument::new(coin(0.3), shape, 4).unwrap().measure(&b, 200).unwrap();
        let c = Instrument::new(coin(0.3), shape, 4).unwrap().measure(&b, 200).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn rejects_unknown_command_and_bad_shapes() {
        let mut inst = Instrument::new(coin(0.3), DetectorShape::new(2, 1).unwrap(), 0).unwrap();
        let other = Command::from_binary("0").unwrap();
        assert_eq!(inst.measure(&other, 1).unwrap_err(), CpcError::CommandNotInSet(other));
        assert!(inst.access_log().is_empty());
        assert!(Instrument::new(coin(0.3), DetectorShape::new(1, 4).unwrap(), 0).is_err());
        assert!(DetectorShape::new(0, 1).is_err());
    }
}
