//! JSON form of a model. Complex numbers are `[re, im]` pairs and matrices
//! are row-major lists of rows.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Eigenspace, HilbertSpace, MeasurementFn, Model, QmError, Spectral, StateFn, UnitaryFn};
use crate::command::Command;
use crate::linalg::{CMatrix, CVector, C64};

type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenspaceFile {
    pub value: f64,
    pub projector: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub states: IndexMap<Command, Vec<Pair>>,
    pub unitaries: IndexMap<Command, Vec<Vec<Pair>>>,
    pub measurements: IndexMap<Command, Vec<EigenspaceFile>>,
}

fn pair(z: &C64) -> Pair {
    [z.re, z.im]
}

fn rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    m.row_iter().map(|r| r.iter().map(pair).collect()).collect()
}

fn matrix(rows: &[Vec<Pair>], dim: usize) -> Result<CMatrix, QmError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(QmError::Malformed(format!("expected a {dim}x{dim} matrix")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = rows[i][j];
        C64::new(re, im)
    }))
}

impl From<&Model> for ModelFile {
    fn from(m: &Model) -> Self {
        Self {
            dim: m.dim(),
            states: m
                .states()
                .iter()
                .map(|(b, v)| (b.clone(), v.iter().map(pair).collect()))
                .collect(),
            unitaries: m.unitaries().iter().map(|(b, u)| (b.clone(), rows(u))).collect(),
            measurements: m
                .measurements()
                .iter()
                .map(|(b, s)| {
                    (
                        b.clone(),
                        s.components()
                            .iter()
                            .map(|c| EigenspaceFile {
                                value: c.value,
                                projector: rows(&c.projector),
                            })
                            .collect(),
                    )
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = QmError;

    fn try_from(f: ModelFile) -> Result<Self, QmError> {
        let space = HilbertSpace::new(f.dim)?;
        let mut v = IndexMap::new();
        for (b, entries) in f.states {
            if entries.len() != f.dim {
                return Err(QmError::DimensionMismatch {
                    expected: f.dim,
                    found: entries.len(),
                });
            }
            v.insert(
                b,
                CVector::from_iterator(f.dim, entries.iter().map(|[re, im]| C64::new(*re, *im))),
            );
        }
        let mut u = IndexMap::new();
        for (b, r) in f.unitaries {
            u.insert(b, matrix(&r, f.dim)?);
        }
        let mut m = IndexMap::new();
        for (b, comps) in f.measurements {
            let components = comps
                .iter()
                .map(|c| {
                    Ok(Eigenspace {
                        value: c.value,
                        projector: matrix(&c.projector, f.dim)?,
                    })
                })
                .collect::<Result<Vec<_>, QmError>>()?;
            let spectral = Spectral::new(components).map_err(|reason| QmError::InvalidMeasurement {
                command: b.clone(),
                reason,
            })?;
            m.insert(b, spectral);
        }
        Model::new(space, StateFn::new(v)?, UnitaryFn::new(u)?, MeasurementFn::new(m))
    }
}

impl Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ModelFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = ModelFile::deserialize(deserializer)?;
        Model::try_from(file).map_err(serde::de::Error::custom)
    }
}
