//! Models that reproduce a record's relative frequencies exactly.
//!
//! Each constructor returns a model with `U = 1` whose outcome probabilities
//! equal `n(j,b)/N(b)` for every recorded outcome. The free parameters (phases,
//! padding eigenvalues, eigenspace vectors) are not fixed by the record, which
//! is what makes the fitted model underdetermined.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::ops::Range;

use indexmap::IndexMap;
use rand::Rng;

use super::{Eigenspace, HilbertSpace, MeasurementFn, Model, OutcomeRecord, QmError, Result, Spectral, StateFn, TOL};
use crate::command::Command;
use crate::linalg::{basis, CMatrix, CVector, C64};

/// Phases `φ(j,b)` on the recorded components and padding eigenvalues
/// `μ_j(b)` for `j > J(b)`. Unset phases are 0; unset padding eigenvalues
/// default to `max_j λ_j(b) + (j − J(b))`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseAssignment {
    phi: HashMap<(Command, usize), f64>,
    mu: HashMap<(Command, usize), f64>,
}

impl PhaseAssignment {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with_phase(mut self, b: &Command, j: usize, phi: f64) -> Self {
        self.phi.insert((b.clone(), j), phi);
        self
    }

    pub fn with_padding(mut self, b: &Command, j: usize, mu: f64) -> Self {
        self.mu.insert((b.clone(), j), mu);
        self
    }

    /// Independent uniform phases in `[0, 2π)` for every recorded outcome.
    pub fn random<R: Rng + ?Sized>(record: &OutcomeRecord, rng: &mut R) -> Self {
        let mut out = Self::zero();
        for (b, ts) in record.iter() {
            for j in 1..=ts.len() {
                out.phi.insert((b.clone(), j), rng.random_range(0.0..TAU));
            }
        }
        out
    }

    pub fn phase(&self, b: &Command, j: usize) -> f64 {
        self.phi.get(&(b.clone(), j)).copied().unwrap_or(0.0)
    }

    fn padding(&self, b: &Command, j: usize, lambdas: &[f64]) -> f64 {
        self.mu.get(&(b.clone(), j)).copied().unwrap_or_else(|| {
            let top = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            top + (j - lambdas.len()) as f64
        })
    }
}

fn require_nonempty(record: &OutcomeRecord) -> Result<()> {
    if record.is_empty() {
        Err(QmError::InvalidRecord("record has no commands".into()))
    } else {
        Ok(())
    }
}

/// Special-case construction: `|v(b)⟩ = Σ_j √(n/N) e^{iφ(j,b)} |j⟩`, `U = 1`,
/// `M(b) = Σ_{j≤J} λ_j |j⟩⟨j| + Σ_{J<j≤padding_dim} μ_j |j⟩⟨j|`.
pub fn construct_fitting_model(record: &OutcomeRecord, phases: &PhaseAssignment, padding_dim: usize) -> Result<Model> {
    require_nonempty(record)?;
    let needed = record.max_distinct();
    if padding_dim < needed {
        return Err(QmError::DimensionMismatch {
            expected: needed,
            found: padding_dim,
        });
    }
    let space = HilbertSpace::new(padding_dim)?;
    let mut v = IndexMap::new();
    let mut m = IndexMap::new();
    for (b, ts) in record.iter() {
        let total = record.total(b) as f64;
        let mut state = CVector::zeros(padding_dim);
        let mut values: Vec<f64> = ts.iter().map(|t| t.lambda).collect();
        for (k, t) in ts.iter().enumerate() {
            let amp = (t.n as f64 / total).sqrt();
            state[k] = C64::from_polar(amp, phases.phase(b, k + 1));
        }
        let lambdas = values.clone();
        for j in ts.len() + 1..=padding_dim {
            let mu = phases.padding(b, j, &lambdas);
            if !mu.is_finite() || values.iter().any(|x| (x - mu).abs() <= TOL) {
                return Err(QmError::InvalidPadding {
                    command: b.clone(),
                    value: mu,
                });
            }
            values.push(mu);
        }
        let spectral = Spectral::diagonal(&values).map_err(QmError::InvalidRecord)?;
        v.insert(b.clone(), state);
        m.insert(b.clone(), spectral);
    }
    Model::with_identity(space, StateFn::new(v)?, MeasurementFn::new(m))
}

/// General construction with eigenspaces of dimension ≥ 2.
///
/// For each command the eigenspace of outcome `j` is the block of consecutive
/// basis vectors returned as a range to `witness`, which must produce a unit
/// vector inside that block. Basis vectors left over after the recorded
/// eigenspaces form a single padding eigenspace.
pub fn construct_fitting_model_general<D, W>(
    record: &OutcomeRecord,
    dim: usize,
    eigenspace_dims: D,
    witness: W,
) -> Result<Model>
where
    D: Fn(&Command, usize) -> usize,
    W: Fn(&Command, usize, Range<usize>) -> CVector,
{
    require_nonempty(record)?;
    let space = HilbertSpace::new(dim)?;
    let mut v = IndexMap::new();
    let mut m = IndexMap::new();
    for (b, ts) in record.iter() {
        let total = record.total(b) as f64;
        let mut state = CVector::zeros(dim);
        let mut components = Vec::with_capacity(ts.len() + 1);
        let mut offset = 0;
        for (k, t) in ts.iter().enumerate() {
            let j = k + 1;
            let width = eigenspace_dims(b, j);
            if width < 2 {
                return Err(QmError::InvalidMeasurement {
                    command: b.clone(),
                    reason: format!("eigenspace {j} has dimension {width}, need at least 2"),
                });
            }
            if offset + width > dim {
                return Err(QmError::DimensionMismatch {
                    expected: dim,
                    found: offset + width,
                });
            }
            let block = offset..offset + width;
            let projector = block_projector(dim, block.clone());
            let w = witness(b, j, block.clone());
            let inside = w.len() == dim
                && (w.norm() - 1.0).abs() <= TOL
                && w.iter().enumerate().all(|(i, z)| block.contains(&i) || z.norm() <= TOL);
            if !inside {
                return Err(QmError::InvalidWitnessVector {
                    command: b.clone(),
                    outcome: j,
                });
            }
            state += w * C64::new((t.n as f64 / total).sqrt(), 0.0);
            components.push(Eigenspace {
                value: t.lambda,
                projector,
            });
            offset += width;
        }
        if offset < dim {
            let top = ts.iter().map(|t| t.lambda).fold(f64::NEG_INFINITY, f64::max);
            components.push(Eigenspace {
                value: top + 1.0,
                projector: block_projector(dim, offset..dim),
            });
        }
        let spectral = Spectral::new(components).map_err(|reason| QmError::InvalidMeasurement {
            command: b.clone(),
            reason,
        })?;
        v.insert(b.clone(), state);
        m.insert(b.clone(), spectral);
    }
    Model::with_identity(space, StateFn::new(v)?, MeasurementFn::new(m))
}

/// Two perfectly fitting models whose states are orthogonal for every
/// command: each outcome gets a 2-dimensional eigenspace, one model uses its
/// first basis vector and the other its second.
pub fn construct_orthogonal_pair(record: &OutcomeRecord) -> Result<(Model, Model)> {
    require_nonempty(record)?;
    let dim = 2 * record.max_distinct();
    let alpha = construct_fitting_model_general(record, dim, |_, _| 2, |_, _, r| basis(dim, r.start))?;
    let beta = construct_fitting_model_general(record, dim, |_, _| 2, |_, _, r| basis(dim, r.start + 1))?;
    Ok((alpha, beta))
}

/// Largest `|Pr(j|b) − n(j,b)/N(b)|` over the record, matching outcomes to
/// eigenvalues by value.
pub fn perfect_fit_residual(model: &Model, record: &OutcomeRecord) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (b, ts) in record.iter() {
        let spectrum = model.spectrum(b)?;
        let total = record.total(b) as f64;
        for t in ts {
            let j = spectrum
                .iter()
                .position(|x| (x - t.lambda).abs() <= TOL)
                .ok_or_else(|| QmError::InvalidRecord(format!("outcome {} not in spectrum of {b}", t.lambda)))?;
            let p = model.outcome_probability(b, j + 1)?;
            worst = worst.max((p - t.n as f64 / total).abs());
        }
    }
    Ok(worst)
}

fn block_projector(dim: usize, block: Range<usize>) -> CMatrix {
    let mut p = CMatrix::zeros(dim, dim);
    for i in block {
        p[(i, i)] = C64::new(1.0, 0.0);
    }
    p
}
