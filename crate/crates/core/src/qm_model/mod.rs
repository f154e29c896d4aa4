//! Command-parameterized quantum models `(|v⟩, U, M)_B`.
//!
//! A [`Model`] assigns to every command `b` of its command set a unit state
//! vector, a unitary and a measurement in spectral form. Outcome `j` for
//! command `b` occurs with probability `⟨v(b)|U†(b) M_j(b) U(b)|v(b)⟩`.
//!
//! Outcome indices are 1-based throughout this module, matching the order of
//! the spectral components of each measurement.

mod fit;
mod io;
mod record;
mod witness;

pub use fit::{
    construct_fitting_model, construct_fitting_model_general, construct_orthogonal_pair, perfect_fit_residual,
    PhaseAssignment,
};
pub use io::ModelFile;
pub use record::{OutcomeRecord, OutcomeTally};
pub use witness::{distinguish_by_witness, witness_family, Witness};

use indexmap::IndexMap;
use thiserror::Error;

use crate::command::{Command, CommandSet};
use crate::linalg::{self, is_projector, is_unit, is_unitary, max_abs_diff, max_abs_diff_vec, CMatrix, CVector, C64};

/// Tolerance for unit norms, unitarity and projector algebra.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmError {
    #[error("command {0} is not in the model's command set")]
    CommandNotInSet(Command),
    #[error("outcome index {index} out of range 1..={max} for command {command}")]
    BadOutcomeIndex { command: Command, index: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Hilbert space dimension must be at least 1")]
    ZeroDimension,
    #[error("state for command {0} is not a unit vector")]
    NotNormalized(Command),
    #[error("operator for command {0} is not unitary")]
    NotUnitary(Command),
    #[error("invalid measurement for command {command}: {reason}")]
    InvalidMeasurement { command: Command, reason: String },
    #[error("state, unitary and measurement functions are defined on different command sets")]
    CommandSetMismatch,
    #[error("probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid outcome record: {0}")]
    InvalidRecord(String),
    #[error("padding eigenvalue {value} for command {command} collides with another eigenvalue")]
    InvalidPadding { command: Command, value: f64 },
    #[error("witness vector for outcome {outcome} of command {command} is not a unit vector of its eigenspace")]
    InvalidWitnessVector { command: Command, outcome: usize },
    #[error("malformed model file: {0}")]
    Malformed(String),
}

pub type Result<T, E = QmError> = std::result::Result<T, E>;

/// Finite truncation of the model's Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    dim: usize,
}

impl HilbertSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QmError::ZeroDimension);
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `b ↦ |v(b)⟩`
#[derive(Debug, Clone, PartialEq)]
pub struct StateFn(IndexMap<Command, CVector>);

impl StateFn {
    pub fn new(map: IndexMap<Command, CVector>) -> Result<Self> {
        for (b, v) in &map {
            if !is_unit(v, TOL) {
                return Err(QmError::NotNormalized(b.clone()));
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, b: &Command) -> Option<&CVector> {
        self.0.get(b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Command, &CVector)> {
        self.0.iter()
    }
}

/// `b ↦ U(b)`; also used for equivalence witnesses `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryFn(IndexMap<Command, CMatrix>);

impl UnitaryFn {
    pub fn new(map: IndexMap<Command, CMatrix>) -> Result<Self> {
        for (b, u) in &map {
            if !is_unitary(u, TOL) {
                return Err(QmError::NotUnitary(b.clone()));
            }
        }
        Ok(Self(map))
    }

    pub fn identity<'a>(commands: impl IntoIterator<Item = &'a Command>, dim: usize) -> Self {
        Self::constant(commands, CMatrix::identity(dim, dim))
    }

    /// Same matrix for every command. The matrix is not validated here.
    pub fn constant<'a>(commands: impl IntoIterator<Item = &'a Command>, u: CMatrix) -> Self {
        Self(commands.into_iter().map(|b| (b.clone(), u.clone())).collect())
    }

    pub fn get(&self, b: &Command) -> Option<&CMatrix> {
        self.0.get(b)
    }

    pub fn commands(&self) -> impl Iterator<Item = &Command> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Command, &CMatrix)> {
        self.0.iter()
    }

    pub fn contains(&self, b: &Command) -> bool {
        self.0.contains_key(b)
    }
}

/// One term `m_j M_j` of a spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub projector: CMatrix,
}

/// Hermitian measurement in spectral form. Projectors are mutually
/// orthogonal, sum to the identity and carry pairwise distinct eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectral {
    components: Vec<Eigenspace>,
}

impl Spectral {
    pub fn new(components: Vec<Eigenspace>) -> std::result::Result<Self, String> {
        let Some(first) = components.first() else {
            return Err("no eigenspaces".into());
        };
        let dim = first.projector.nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (j, c) in components.iter().enumerate() {
            if c.projector.nrows() != dim || c.projector.ncols() != dim {
                return Err(format!("projector {} has the wrong shape", j + 1));
            }
            if !c.value.is_finite() {
                return Err(format!("eigenvalue {} is not finite", j + 1));
            }
            if !is_projector(&c.projector, TOL) {
                return Err(format!("M_{} is not an orthogonal projector", j + 1));
            }
            if c.projector.trace().re < 0.5 {
                return Err(format!("M_{} is the zero projector", j + 1));
            }
            for (k, d) in components.iter().enumerate().skip(j + 1) {
                if (c.value - d.value).abs() <= TOL {
                    return Err(format!("eigenvalues {} and {} coincide", j + 1, k + 1));
                }
                let prod = &c.projector * &d.projector;
                if prod.iter().any(|z| z.norm() > TOL) {
                    return Err(format!("M_{} M_{} is not zero", j + 1, k + 1));
                }
            }
            sum += &c.projector;
        }
        if max_abs_diff(&sum, &CMatrix::identity(dim, dim)) > TOL {
            return Err("projectors do not sum to the identity".into());
        }
        Ok(Self { components })
    }

    /// Diagonal measurement `Σ_k values[k] |k⟩⟨k|` in the computational basis.
    pub fn diagonal(values: &[f64]) -> std::result::Result<Self, String> {
        let dim = values.len();
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(k, &value)| Eigenspace {
                    value,
                    projector: linalg::outer(&linalg::basis(dim, k), &linalg::basis(dim, k)),
                })
                .collect(),
        )
    }

    /// Two-outcome measurement `{1·P, 0·(I − P)}`.
    pub fn binary(projector: CMatrix) -> std::result::Result<Self, String> {
        let dim = projector.nrows();
        let rest = CMatrix::identity(dim, dim) - &projector;
        Self::new(vec![
            Eigenspace { value: 1.0, projector },
            Eigenspace {
                value: 0.0,
                projector: rest,
            },
        ])
    }

    pub fn components(&self) -> &[Eigenspace] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].projector.nrows()
    }

    pub fn values(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.value).collect()
    }

    /// Reassembled hermitian operator `Σ m_j M_j`.
    pub fn operator(&self) -> CMatrix {
        let dim = self.dim();
        self.components.iter().fold(CMatrix::zeros(dim, dim), |acc, c| {
            acc + &c.projector * C64::new(c.value, 0.0)
        })
    }

    /// `Q M Q†` applied to each projector.
    pub fn conjugate(&self, q: &CMatrix) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Eigenspace {
                    value: c.value,
                    projector: q * &c.projector * q.adjoint(),
                })
                .collect(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.components.len() == other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| (a.value - b.value).abs() <= tol && max_abs_diff(&a.projector, &b.projector) <= tol)
    }
}

/// `b ↦ M(b)`
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFn(IndexMap<Command, Spectral>);

impl MeasurementFn {
    pub fn new(map: IndexMap<Command, Spectral>) -> Self {
        Self(map)
    }

    pub fn constant<'a>(commands: impl IntoIterator<Item = &'a Command>, m: Spectral) -> Self {
        Self(commands.into_iter().map(|b| (b.clone(), m.clone())).collect())
    }

    pub fn get(&self, b: &Command) -> Option<&Spectral> {
        self.0.get(b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Command, &Spectral)> {
        self.0.iter()
    }
}

/// A quantum-mechanical model `(|v⟩, U, M)_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    space: HilbertSpace,
    commands: CommandSet,
    v: StateFn,
    u: UnitaryFn,
    m: MeasurementFn,
}

impl Model {
    /// The command set is taken from `v` in its order; `u` and `m` must be
    /// defined on exactly the same commands.
    pub fn new(space: HilbertSpace, v: StateFn, u: UnitaryFn, m: MeasurementFn) -> Result<Self> {
        let commands: CommandSet = v.0.keys().cloned().collect();
        if u.0.len() != commands.len()
            || m.0.len() != commands.len()
            || !commands.iter().all(|b| u.0.contains_key(b) && m.0.contains_key(b))
        {
            return Err(QmError::CommandSetMismatch);
        }
        let dim = space.dim();
        for b in &commands {
            check_dim(dim, v.0[b].len())?;
            let ub = &u.0[b];
            check_dim(dim, ub.nrows())?;
            check_dim(dim, ub.ncols())?;
            check_dim(dim, m.0[b].dim())?;
        }
        Ok(Self {
            space,
            commands,
            v,
            u,
            m,
        })
    }

    /// Model with `U = 1` and the given states and measurements.
    pub fn with_identity(space: HilbertSpace, v: StateFn, m: MeasurementFn) -> Result<Self> {
        let u = UnitaryFn::identity(v.0.keys(), space.dim());
        Self::new(space, v, u, m)
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn commands(&self) -> &CommandSet {
        &self.commands
    }

    pub fn states(&self) -> &StateFn {
        &self.v
    }

    pub fn unitaries(&self) -> &UnitaryFn {
        &self.u
    }

    pub fn measurements(&self) -> &MeasurementFn {
        &self.m
    }

    pub fn state(&self, b: &Command) -> Result<&CVector> {
        self.v.get(b).ok_or_else(|| QmError::CommandNotInSet(b.clone()))
    }

    pub fn unitary(&self, b: &Command) -> Result<&CMatrix> {
        self.u.get(b).ok_or_else(|| QmError::CommandNotInSet(b.clone()))
    }

    pub fn measurement(&self, b: &Command) -> Result<&Spectral> {
        self.m.get(b).ok_or_else(|| QmError::CommandNotInSet(b.clone()))
    }

    /// `U(b)|v(b)⟩`
    pub fn evolved_state(&self, b: &Command) -> Result<CVector> {
        Ok(self.unitary(b)? * self.state(b)?)
    }

    /// `Pr(j|b) = ⟨v(b)|U†(b) M_j(b) U(b)|v(b)⟩` for 1-based `j`.
    pub fn outcome_probability(&self, b: &Command, j: usize) -> Result<f64> {
        let spectral = self.measurement(b)?;
        if j == 0 || j > spectral.len() {
            return Err(QmError::BadOutcomeIndex {
                command: b.clone(),
                index: j,
                max: spectral.len(),
            });
        }
        let psi = self.evolved_state(b)?;
        sandwich(&psi, &spectral.components[j - 1].projector)
    }

    /// All outcome probabilities for `b`, in spectral order.
    pub fn distribution(&self, b: &Command) -> Result<Vec<f64>> {
        let psi = self.evolved_state(b)?;
        self.measurement(b)?
            .components
            .iter()
            .map(|c| sandwich(&psi, &c.projector))
            .collect()
    }

    /// Probability of the first outcome of a binary measurement given by a
    /// single projector, for command `b`.
    pub fn projector_probability(&self, b: &Command, projector: &CMatrix) -> Result<f64> {
        let psi = self.evolved_state(b)?;
        check_dim(self.dim(), projector.nrows())?;
        sandwich(&psi, projector)
    }

    /// Eigenvalues of `M(b)` in spectral order.
    pub fn spectrum(&self, b: &Command) -> Result<Vec<f64>> {
        Ok(self.measurement(b)?.values())
    }

    /// Reduction to `(U|v⟩, 1, M)`.
    pub fn reduce(&self) -> Model {
        let v = self
            .commands
            .iter()
            .map(|b| (b.clone(), &self.u.0[b] * &self.v.0[b]))
            .collect();
        Model {
            space: self.space,
            commands: self.commands.clone(),
            v: StateFn(v),
            u: UnitaryFn::identity(&self.commands, self.dim()),
            m: self.m.clone(),
        }
    }

    /// `(Q v, Q U Q†, Q M Q†)` per command.
    pub fn apply_equivalence(&self, q: &UnitaryFn) -> Result<Model> {
        let mut v = IndexMap::new();
        let mut u = IndexMap::new();
        let mut m = IndexMap::new();
        for b in &self.commands {
            let qb = q.get(b).ok_or_else(|| QmError::CommandNotInSet(b.clone()))?;
            check_dim(self.dim(), qb.nrows())?;
            check_dim(self.dim(), qb.ncols())?;
            v.insert(b.clone(), qb * &self.v.0[b]);
            u.insert(b.clone(), qb * &self.u.0[b] * qb.adjoint());
            m.insert(b.clone(), self.m.0[b].conjugate(qb));
        }
        Ok(Model {
            space: self.space,
            commands: self.commands.clone(),
            v: StateFn(v),
            u: UnitaryFn(u),
            m: MeasurementFn(m),
        })
    }

    /// Same states and unitaries, different measurement function.
    pub fn with_measurements(&self, m: MeasurementFn) -> Result<Model> {
        Model::new(self.space, self.v.clone(), self.u.clone(), m)
    }

    /// Entrywise equality of every component within `tol`; command sets are
    /// compared as sets.
    pub fn approx_eq(&self, other: &Model, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.commands.len() == other.commands.len()
            && self
                .commands
                .iter()
                .all(|b| match (other.v.get(b), other.u.get(b), other.m.get(b)) {
                    (Some(v), Some(u), Some(m)) => {
                        max_abs_diff_vec(&self.v.0[b], v) <= tol
                            && max_abs_diff(&self.u.0[b], u) <= tol
                            && self.m.0[b].approx_eq(m, tol)
                    }
                    _ => false,
                })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(QmError::DimensionMismatch { expected, found })
    }
}

/// `⟨ψ|P|ψ⟩`, clamped into `[0, 1]` only when within [`TOL`] of it.
fn sandwich(psi: &CVector, p: &CMatrix) -> Result<f64> {
    let value = psi.dotc(&(p * psi)).re;
    clamp_probability(value)
}

pub(crate) fn clamp_probability(value: f64) -> Result<f64> {
    if (-TOL..=1.0 + TOL).contains(&value) {
        Ok(value.clamp(0.0, 1.0))
    } else {
        Err(QmError::ProbabilityOutOfRange(value))
    }
}
