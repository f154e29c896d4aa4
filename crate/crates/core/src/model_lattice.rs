//! Finite sets of models ordered by inclusion.
//!
//! Sets are either explicit lists or gridded parametric families carrying
//! narrowing predicates. Meet and join operate on explicit sets, with model
//! identity decided by entrywise equality within [`IDENTITY_TOL`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::command::{Command, CommandSet};
use crate::linalg::max_abs_diff;
use crate::qm_model::{Model, OutcomeRecord, QmError, UnitaryFn};
use crate::stat_distance::{weighted_record_distance, CommandWeights, StatError};

pub const IDENTITY_TOL: f64 = 1e-12;
/// Scores closer than this are ties.
pub const TIE_TOL: f64 = 1e-12;
/// Default tolerance for the narrowing predicates.
pub const PREDICATE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("parametric family must be materialized first")]
    NotMaterialized,
    #[error("model set is empty")]
    EmptyModelSet,
    #[error("split does not decompose command {0}")]
    BadSplit(Command),
    #[error("command {0} is outside the unitary function's domain")]
    CommandNotInSet(Command),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Model(#[from] QmError),
}

pub type Result<T, E = LatticeError> = std::result::Result<T, E>;

type Test = Arc<dyn Fn(&Model) -> bool + Send + Sync>;
pub type Generator = Arc<dyn Fn(&[f64]) -> Result<Model, QmError> + Send + Sync>;

/// A named constraint used to narrow a model set.
#[derive(Clone)]
pub struct NarrowingPredicate {
    name: String,
    test: Test,
}

impl fmt::Debug for NarrowingPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NarrowingPredicate").field("name", &self.name).finish()
    }
}

impl NarrowingPredicate {
    pub fn new(name: impl Into<String>, test: impl Fn(&Model) -> bool + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            test: Arc::new(test),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn test(&self, model: &Model) -> bool {
        (self.test)(model)
    }

    /// Models whose commands split as `b_v ∥ b_U ∥ b_M` with each function
    /// depending only on its own part. Errors count as failure.
    pub fn property3<S>(split: S, tol: f64) -> Self
    where
        S: Fn(&Command) -> Option<(Command, Command, Command)> + Send + Sync + 'static,
    {
        Self::new("property3", move |m| {
            check_property3_with(m, &split, tol).unwrap_or(false)
        })
    }

    /// Models whose `U` respects concatenation over `bu_set`.
    pub fn property4(bu_set: CommandSet, tol: f64) -> Self {
        Self::new("property4", move |m| {
            check_property4_with(m.unitaries(), &bu_set, tol).unwrap_or(false)
        })
    }
}

/// Gridded family `θ ↦ Model` with attached predicates.
#[derive(Clone)]
pub struct ParametricFamily {
    pub name: String,
    generator: Generator,
    pub grid: Vec<Vec<f64>>,
    predicates: Vec<NarrowingPredicate>,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("grid", &self.grid.len())
            .field("predicates", &self.predicates)
            .finish()
    }
}

impl ParametricFamily {
    pub fn new(
        name: impl Into<String>,
        generator: impl Fn(&[f64]) -> Result<Model, QmError> + Send + Sync + 'static,
        grid: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            name: name.into(),
            generator: Arc::new(generator),
            grid,
            predicates: Vec::new(),
        }
    }

    pub fn predicates(&self) -> &[NarrowingPredicate] {
        &self.predicates
    }
}

#[derive(Debug, Clone)]
pub enum ModelSet {
    Explicit(Vec<Model>),
    Parametric(ParametricFamily),
}

impl ModelSet {
    /// Explicit set; repeated members (by identity) are dropped.
    pub fn explicit(models: impl IntoIterator<Item = Model>) -> Self {
        let mut out: Vec<Model> = Vec::new();
        for m in models {
            if !contains(&out, &m) {
                out.push(m);
            }
        }
        ModelSet::Explicit(out)
    }

    pub fn empty() -> Self {
        ModelSet::Explicit(Vec::new())
    }

    pub fn members(&self) -> Result<&[Model]> {
        match self {
            ModelSet::Explicit(m) => Ok(m),
            ModelSet::Parametric(_) => Err(LatticeError::NotMaterialized),
        }
    }

    /// Evaluates the generator on every grid point and keeps members passing
    /// all predicates, in grid order.
    pub fn materialize(&self) -> Result<ModelSet> {
        match self {
            ModelSet::Explicit(_) => Ok(self.clone()),
            ModelSet::Parametric(f) => {
                let generated = f
                    .grid
                    .par_iter()
                    .map(|theta| (f.generator)(theta))
                    .collect::<Result<Vec<_>, QmError>>()?;
                Ok(ModelSet::explicit(
                    generated.into_iter().filter(|m| f.predicates.iter().all(|p| p.test(m))),
                ))
            }
        }
    }

    /// Restricts the set to members satisfying `predicate`.
    pub fn narrow(&self, predicate: NarrowingPredicate) -> ModelSet {
        match self {
            ModelSet::Explicit(m) => ModelSet::Explicit(m.iter().filter(|x| predicate.test(x)).cloned().collect()),
            ModelSet::Parametric(f) => {
                let mut f = f.clone();
                f.predicates.push(predicate);
                ModelSet::Parametric(f)
            }
        }
    }

    /// Same members regardless of order.
    pub fn same_members(&self, other: &ModelSet) -> Result<bool> {
        let (a, b) = (self.members()?, other.members()?);
        Ok(a.len() == b.len() && a.iter().all(|m| contains(b, m)))
    }
}

fn contains(set: &[Model], m: &Model) -> bool {
    set.iter().any(|x| x.approx_eq(m, IDENTITY_TOL))
}

/// Intersection, in `a`'s order.
pub fn meet(a: &ModelSet, b: &ModelSet) -> Result<ModelSet> {
    let (xs, ys) = (a.members()?, b.members()?);
    Ok(ModelSet::Explicit(
        xs.iter().filter(|m| contains(ys, m)).cloned().collect(),
    ))
}

/// Union: `a`'s members followed by `b`'s members not in `a`.
pub fn join(a: &ModelSet, b: &ModelSet) -> Result<ModelSet> {
    let (xs, ys) = (a.members()?, b.members()?);
    let mut out = xs.to_vec();
    out.extend(ys.iter().filter(|m| !contains(xs, m)).cloned());
    Ok(ModelSet::Explicit(out))
}

/// Fixed-width split `b = b_v ∥ b_U ∥ b_M`.
pub fn fixed_width_split(
    v_bits: usize,
    u_bits: usize,
    m_bits: usize,
) -> impl Fn(&Command) -> Option<(Command, Command, Command)> + Send + Sync + Clone {
    move |b| {
        if b.len() != v_bits + u_bits + m_bits {
            return None;
        }
        let bits = b.bits();
        Some((
            Command::from_bits(bits[..v_bits].iter().copied()),
            Command::from_bits(bits[v_bits..v_bits + u_bits].iter().copied()),
            Command::from_bits(bits[v_bits + u_bits..].iter().copied()),
        ))
    }
}

/// True iff `v` depends only on `b_v`, `U` only on `b_U` and `M` only on `b_M`.
pub fn check_property3<S>(model: &Model, split: S) -> Result<bool>
where
    S: Fn(&Command) -> Option<(Command, Command, Command)>,
{
    check_property3_with(model, &split, PREDICATE_TOL)
}

fn check_property3_with<S>(model: &Model, split: &S, tol: f64) -> Result<bool>
where
    S: Fn(&Command) -> Option<(Command, Command, Command)>,
{
    let parts: Vec<(&Command, (Command, Command, Command))> = model
        .commands()
        .iter()
        .map(|b| match split(b) {
            Some(p) if p.0.concat(&p.1).concat(&p.2) == *b => Ok((b, p)),
            _ => Err(LatticeError::BadSplit(b.clone())),
        })
        .collect::<Result<_>>()?;
    for (i, (b1, (v1, u1, m1))) in parts.iter().enumerate() {
        for (b2, (v2, u2, m2)) in &parts[i + 1..] {
            if v1 == v2 {
                let diff = (model.state(b1)? - model.state(b2)?)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                if diff > tol {
                    return Ok(false);
                }
            }
            if u1 == u2 && max_abs_diff(model.unitary(b1)?, model.unitary(b2)?) > tol {
                return Ok(false);
            }
            if m1 == m2 && !model.measurement(b1)?.approx_eq(model.measurement(b2)?, tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff `U(b1 ∥ b2) = U(b2) U(b1)` for every pair in `bu_set` whose
/// concatenation is also in `bu_set`.
pub fn check_property4(u: &UnitaryFn, bu_set: &CommandSet) -> Result<bool> {
    check_property4_with(u, bu_set, PREDICATE_TOL)
}

fn check_property4_with(u: &UnitaryFn, bu_set: &CommandSet, tol: f64) -> Result<bool> {
    if let Some(b) = bu_set.iter().find(|b| !u.contains(b)) {
        return Err(LatticeError::CommandNotInSet(b.clone()));
    }
    let pairs: Vec<(Command, Command)> = bu_set
        .iter()
        .flat_map(|b1| bu_set.iter().map(move |b2| (b1.clone(), b2.clone())))
        .filter(|(b1, b2)| bu_set.contains(&b1.concat(b2)))
        .collect();
    check_property4_pairs(u, &pairs, tol)
}

/// [`check_property4`] on explicit pairs; every concatenation must lie in
/// `u`'s domain.
pub fn check_property4_pairs(u: &UnitaryFn, pairs: &[(Command, Command)], tol: f64) -> Result<bool> {
    for (b1, b2) in pairs {
        let joined = b1.concat(b2);
        let lookup = |b: &Command| u.get(b).ok_or_else(|| LatticeError::CommandNotInSet(b.clone()));
        let product = lookup(b2)? * lookup(b1)?;
        if max_abs_diff(lookup(&joined)?, &product) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct BestFit {
    pub index: usize,
    pub model: Model,
    pub score: f64,
}

/// Member with the least weighted statistical distance to the record's
/// relative frequencies. Ties go to the earliest member.
pub fn select_best_fit(set: &ModelSet, record: &OutcomeRecord, weights: &CommandWeights) -> Result<BestFit> {
    let members = set.members()?;
    if members.is_empty() {
        return Err(LatticeError::EmptyModelSet);
    }
    let scores = members
        .par_iter()
        .map(|m| weighted_record_distance(m, record, weights))
        .collect::<Result<Vec<f64>, StatError>>()?;
    let (index, score) =
        scores.iter().copied().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, s)| {
                if s < best.1 - TIE_TOL {
                    (i, s)
                } else {
                    best
                }
            },
        );
    Ok(BestFit {
        index,
        model: members[index].clone(),
        score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, expi_hermitian, random_state, random_unitary, CMatrix, C64, ONE};
    use crate::qm_model::{construct_fitting_model, HilbertSpace, MeasurementFn, PhaseAssignment, Spectral, StateFn};
    use indexmap::IndexMap;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cmd(s: &str) -> Command {
        Command::from_binary(s).unwrap()
    }

    fn pool(n: usize, seed: u64) -> Vec<Model> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = cmd("0");
        (0..n)
            .map(|_| {
                Model::with_identity(
                    HilbertSpace::new(2).unwrap(),
                    StateFn::new([(b.clone(), random_state(2, &mut rng))].into_iter().collect()).unwrap(),
                    MeasurementFn::constant([&b], Spectral::diagonal(&[0.0, 1.0]).unwrap()),
                )
                .unwrap()
            })
            .collect()
    }

    fn subset(pool: &[Model], mask: u16) -> ModelSet {
        ModelSet::explicit(
            pool.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, m)| m.clone()),
        )
    }

    #[test]
    fn lattice_examples() {
        let p = pool(3, 1);
        let a = subset(&p, 0b011);
        let b = subset(&p, 0b110);
        assert!(meet(&a, &a).unwrap().same_members(&a).unwrap());
        assert!(join(&a, &a).unwrap().same_members(&a).unwrap());
        assert!(meet(&a, &join(&a, &b).unwrap()).unwrap().same_members(&a).unwrap());
        let s0 = subset(&p, 0b001);
        let s2 = subset(&p, 0b100);
        assert_eq!(meet(&s0, &s2).unwrap().members().unwrap().len(), 0);
        assert_eq!(join(&s0, &s2).unwrap().members().unwrap().len(), 2);
    }

    #[test]
    fn unmaterialized_family_is_rejected() {
        let fam = ModelSet::Parametric(ParametricFamily::new("none", |_| Err(QmError::ZeroDimension), vec![]));
        assert_eq!(meet(&fam, &fam).unwrap_err(), LatticeError::NotMaterialized);
        assert_eq!(
            join(&ModelSet::empty(), &fam).unwrap_err(),
            LatticeError::NotMaterialized
        );
    }

    proptest! {
        #[test]
        fn lattice_laws(x in 0u16..64, y in 0u16..64, z in 0u16..64) {
            let p = pool(6, 2);
            let (a, b, c) = (subset(&p, x), subset(&p, y), subset(&p, z));
            let same = |l: ModelSet, r: ModelSet| l.same_members(&r).unwrap();
            prop_assert!(same(meet(&a, &b).unwrap(), meet(&b, &a).unwrap()));
            prop_assert!(same(join(&a, &b).unwrap(), join(&b, &a).unwrap()));
            prop_assert!(same(meet(&meet(&a, &b).unwrap(), &c).unwrap(), meet(&a, &meet(&b, &c).unwrap()).unwrap()));
            prop_assert!(same(join(&join(&a, &b).unwrap(), &c).unwrap(), join(&a, &join(&b, &c).unwrap()).unwrap()));
            prop_assert!(same(meet(&a, &join(&a, &b).unwrap()).unwrap(), a.clone()));
            prop_assert!(same(join(&a, &meet(&a, &b).unwrap()).unwrap(), a.clone()));
            prop_assert!(same(meet(&a, &a).unwrap(), a.clone()));
            prop_assert!(same(join(&a, &a).unwrap(), a.clone()));
        }
    }

    /// `(v(b_v), U(b_U), M(b_M))` over all 1-bit parts.
    fn separable_model(rng: &mut ChaCha8Rng) -> Model {
        let vs = [random_state(2, rng), random_state(2, rng)];
        let us = [random_unitary(2, rng), random_unitary(2, rng)];
        let ms = [
            Spectral::diagonal(&[0.0, 1.0]).unwrap(),
            Spectral::diagonal(&[0.0, 1.0])
                .unwrap()
                .conjugate(&random_unitary(2, rng)),
        ];
        let mut v = IndexMap::new();
        let mut u = IndexMap::new();
        let mut m = IndexMap::new();
        for code in 0..8u64 {
            let b = Command::from_uint(code, 3);
            let bits = b.bits().to_vec();
            v.insert(b.clone(), vs[bits[0] as usize].clone());
            u.insert(b.clone(), us[bits[1] as usize].clone());
            m.insert(b.clone(), ms[bits[2] as usize].clone());
        }
        Model::new(
            HilbertSpace::new(2).unwrap(),
            StateFn::new(v).unwrap(),
            UnitaryFn::new(u).unwrap(),
            MeasurementFn::new(m),
        )
        .unwrap()
    }

    #[test]
    fn property3_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let good = separable_model(&mut rng);
        assert!(check_property3(&good, fixed_width_split(1, 1, 1)).unwrap());

        // v varies with b_M
        let mut v = IndexMap::new();
        for b in good.commands() {
            v.insert(
                b.clone(),
                if b.bits()[2] {
                    random_state(2, &mut rng)
                } else {
                    good.state(b).unwrap().clone()
                },
            );
        }
        let bad = Model::new(
            good.space(),
            StateFn::new(v).unwrap(),
            good.unitaries().clone(),
            good.measurements().clone(),
        )
        .unwrap();
        assert!(!check_property3(&bad, fixed_width_split(1, 1, 1)).unwrap());

        let single = pool(1, 4).remove(0);
        assert!(check_property3(&single, |b: &Command| Some((
            b.clone(),
            Command::empty(),
            Command::empty()
        )))
        .unwrap());
        assert!(matches!(
            check_property3(&good, fixed_width_split(1, 1, 2)),
            Err(LatticeError::BadSplit(_))
        ));
    }

    #[test]
    fn property4_cases() {
        // U(b) = exp(i H · popcount(b)) with popcount additive under ∥
        let h = CMatrix::from_row_slice(2, 2, &[ONE * 0.3, C64::new(0.1, -0.2), C64::new(0.1, 0.2), -ONE * 0.7]);
        let bu_set: CommandSet = ["", "0", "1", "00", "01", "10", "11"].iter().map(|s| cmd(s)).collect();
        let u = UnitaryFn::new(
            bu_set
                .iter()
                .map(|b| (b.clone(), expi_hermitian(&h, b.count_ones() as f64)))
                .collect(),
        )
        .unwrap();
        assert!(check_property4(&u, &bu_set).unwrap());
        assert!(max_abs_diff(u.get(&Command::empty()).unwrap(), &CMatrix::identity(2, 2)) < 1e-12);

        let x = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), ONE, ONE, C64::new(0.0, 0.0)]);
        let s = diag(&[ONE, C64::new(0.0, 1.0)]);
        let constant = UnitaryFn::constant(&bu_set, s);
        assert!(!check_property4(&constant, &bu_set).unwrap());
        let swap_const = UnitaryFn::constant(&bu_set, x);
        assert!(!check_property4(&swap_const, &bu_set).unwrap());

        let partial = UnitaryFn::constant([&cmd("0")], CMatrix::identity(2, 2));
        assert!(matches!(
            check_property4_pairs(&partial, &[(cmd("0"), cmd("0"))], 1e-9),
            Err(LatticeError::CommandNotInSet(_))
        ));
        assert!(matches!(
            check_property4(&partial, &bu_set),
            Err(LatticeError::CommandNotInSet(_))
        ));
    }

    #[test]
    fn best_fit_selection() {
        let b = cmd("1");
        let record =
            OutcomeRecord::from_observations([(b.clone(), 0.0), (b.clone(), 0.0), (b.clone(), 0.0), (b.clone(), 1.0)]);
        let generating = construct_fitting_model(&record, &PhaseAssignment::zero(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut members = pool(4, 6)
            .into_iter()
            .map(|m| {
                let v = random_state(2, &mut rng);
                Model::with_identity(
                    m.space(),
                    StateFn::new([(b.clone(), v)].into_iter().collect()).unwrap(),
                    MeasurementFn::constant([&b], Spectral::diagonal(&[0.0, 1.0]).unwrap()),
                )
                .unwrap()
            })
            .collect::<Vec<_>>();
        members.insert(2, generating.clone());
        let w = CommandWeights::uniform([&b]).unwrap();
        let best = select_best_fit(&ModelSet::explicit(members.clone()), &record, &w).unwrap();
        assert_eq!(best.index, 2);
        assert!(best.score < 1e-9);

        let single = ModelSet::explicit([members[0].clone()]);
        assert_eq!(select_best_fit(&single, &record, &w).unwrap().index, 0);
        assert_eq!(
            select_best_fit(&ModelSet::empty(), &record, &w).unwrap_err(),
            LatticeError::EmptyModelSet
        );
    }

    #[test]
    fn phase_variants_tie() {
        let b = cmd("1");
        let record = OutcomeRecord::from_observations([(b.clone(), 0.0), (b.clone(), 1.0)]);
        let first = construct_fitting_model(&record, &PhaseAssignment::zero().with_phase(&b, 2, 1.0), 2).unwrap();
        let second = construct_fitting_model(&record, &PhaseAssignment::zero().with_phase(&b, 2, 2.0), 2).unwrap();
        let set = ModelSet::explicit([first.clone(), second.clone()]);
        let w = CommandWeights::uniform([&b]).unwrap();
        let best = select_best_fit(&set, &record, &w).unwrap();
        assert_eq!(best.index, 0);
        assert!(best.score < 1e-9);
        assert!(crate::stat_distance::weighted_record_distance(&second, &record, &w).unwrap() < 1e-9);
    }

    #[test]
    fn family_materializes_with_predicates() {
        let b = cmd("1");
        let fam = ParametricFamily::new(
            "rotation",
            move |theta: &[f64]| {
                let v = crate::linalg::CVector::from_column_slice(&[
                    C64::new((theta[0] / 2.0).cos(), 0.0),
                    C64::new((theta[0] / 2.0).sin(), 0.0),
                ]);
                Model::with_identity(
                    HilbertSpace::new(2)?,
                    StateFn::new([(Command::from_binary("1").unwrap(), v)].into_iter().collect())?,
                    MeasurementFn::constant(
                        [&Command::from_binary("1").unwrap()],
                        Spectral::diagonal(&[0.0, 1.0]).unwrap(),
                    ),
                )
            },
            (0..10).map(|k| vec![k as f64 * 0.3]).collect(),
        );
        let set = ModelSet::Parametric(fam);
        assert_eq!(set.materialize().unwrap().members().unwrap().len(), 10);
        let narrowed = set.narrow(NarrowingPredicate::new("mostly-zero", move |m| {
            m.outcome_probability(&b, 1).unwrap() > 0.5
        }));
        let members = narrowed.materialize().unwrap();
        assert_eq!(members.members().unwrap().len(), 6);
    }
}
