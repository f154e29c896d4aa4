//! Statistical distance between outcome distributions.
//!
//! The distance is the Bhattacharyya angle `d(p, q) = arccos Σ_j √(p_j q_j)`,
//! which lies in `[0, π/2]`. Two distributions are statistically
//! indistinguishable in `N` trials unless `√N · d > 1`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::Command;
use crate::linalg::{spectral_norm, CVector};
use crate::qm_model::{Model, OutcomeRecord, QmError, UnitaryFn};

const MATCH_TOL: f64 = 1e-9;
const PROB_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;
/// Added to zero probabilities before taking log-ratios.
pub const LRT_SMOOTHING: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatError {
    #[error("distributions have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid command weights: {0}")]
    InvalidWeights(String),
    #[error("sample size must be positive")]
    BadSampleSize,
    #[error("epsilon must lie in (0, 2], got {0}")]
    BadEpsilon(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("spectra differ for command {0}")]
    SpectraMismatch(Command),
    #[error("command {0} is not shared by both sides")]
    CommandNotInSet(Command),
    #[error(transparent)]
    Model(#[from] QmError),
}

pub type Result<T, E = StatError> = std::result::Result<T, E>;

/// Probability vector over a finite outcome set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(StatError::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < -PROB_TOL || **p > 1.0 + PROB_TOL)
        {
            return Err(StatError::InvalidDistribution(format!("entry {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(StatError::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Relative frequencies of non-empty tallies.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(StatError::BadSampleSize);
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = StatError;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(value: Distribution) -> Self {
        value.0
    }
}

/// Nonnegative weights over commands summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandWeights(IndexMap<Command, f64>);

impl CommandWeights {
    pub fn new(weights: IndexMap<Command, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(StatError::InvalidWeights("no commands".into()));
        }
        if weights.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(StatError::InvalidWeights("negative or non-finite weight".into()));
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(StatError::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(Self(weights))
    }

    pub fn uniform<'a>(commands: impl IntoIterator<Item = &'a Command>) -> Result<Self> {
        let cmds: Vec<&Command> = commands.into_iter().collect();
        let w = 1.0 / cmds.len() as f64;
        Self::new(cmds.into_iter().map(|b| (b.clone(), w)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Command, f64)> {
        self.0.iter().map(|(b, w)| (b, *w))
    }
}

/// Bhattacharyya angle via the chord form `2 asin(‖√p − √q‖ / 2)`, which
/// equals `arccos Σ √(p_j q_j)` for normalized inputs without the loss of
/// precision `acos` suffers near 1.
fn angle(p: &[f64], q: &[f64]) -> f64 {
    let chord = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2))
        .sum::<f64>()
        .sqrt();
    2.0 * (chord / 2.0).min(1.0).asin()
}

/// `arccos Σ_j √(p_j q_j)`, in radians.
pub fn statistical_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(StatError::LengthMismatch(p.len(), q.len()));
    }
    Ok(angle(&p.0, &q.0))
}

/// True iff `√n · d(p, q) ≤ 1`.
pub fn indistinguishable_in_trials(p: &Distribution, q: &Distribution, n: u64) -> Result<bool> {
    if n == 0 {
        return Err(StatError::BadSampleSize);
    }
    Ok((n as f64).sqrt() * statistical_distance(p, q)? <= 1.0)
}

/// `arccos |⟨a|b⟩|` for unit vectors.
pub fn vector_distance_bound(a: &CVector, b: &CVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(StatError::DimensionMismatch(a.len(), b.len()));
    }
    for v in [a, b] {
        if (v.norm() - 1.0).abs() > MATCH_TOL {
            return Err(StatError::InvalidDistribution("state is not a unit vector".into()));
        }
    }
    // align global phase, then use the chord: ‖a − e^{iθ}b‖ = 2 sin(d/2)
    let overlap = b.dotc(a);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        num_complex::Complex64::new(1.0, 0.0)
    };
    let chord = (a - b * phase).norm();
    Ok(2.0 * (chord / 2.0).min(1.0).asin())
}

/// Per-command distance between two models whose measurements share a
/// spectrum; outcomes are paired by eigenvalue.
pub fn model_distance_for(a: &Model, b: &Model, cmd: &Command) -> Result<f64> {
    let (sa, sb) = match (a.spectrum(cmd), b.spectrum(cmd)) {
        (Ok(sa), Ok(sb)) => (sa, sb),
        _ => return Err(StatError::CommandNotInSet(cmd.clone())),
    };
    if sa.len() != sb.len() {
        return Err(StatError::SpectraMismatch(cmd.clone()));
    }
    let pa = a.distribution(cmd)?;
    let pb = b.distribution(cmd)?;
    let mut q = Vec::with_capacity(sa.len());
    for value in &sa {
        let k = sb
            .iter()
            .position(|x| (x - value).abs() <= MATCH_TOL)
            .ok_or_else(|| StatError::SpectraMismatch(cmd.clone()))?;
        q.push(pb[k]);
    }
    Ok(angle(&pa, &q))
}

/// Per-command distance between a model's predictions and a record's relative
/// frequencies; recorded outcomes are matched to eigenvalues by value.
pub fn record_distance_for(model: &Model, record: &OutcomeRecord, cmd: &Command) -> Result<f64> {
    let (spectrum, tallies) = match (model.spectrum(cmd), record.tallies(cmd)) {
        (Ok(s), Some(t)) => (s, t),
        _ => return Err(StatError::CommandNotInSet(cmd.clone())),
    };
    let total = record.total(cmd) as f64;
    let mut freq = vec![0.0; spectrum.len()];
    for t in tallies {
        let k = spectrum
            .iter()
            .position(|x| (x - t.lambda).abs() <= MATCH_TOL)
            .ok_or_else(|| StatError::SpectraMismatch(cmd.clone()))?;
        freq[k] = t.n as f64 / total;
    }
    Ok(angle(&model.distribution(cmd)?, &freq))
}

/// `Σ_b w(b) · d(Pr_α(·|b), Pr_β(·|b))`.
pub fn weighted_model_distance(a: &Model, b: &Model, weights: &CommandWeights) -> Result<f64> {
    weights
        .iter()
        .map(|(cmd, w)| Ok(w * model_distance_for(a, b, cmd)?))
        .sum()
}

/// Weighted distance between a model and a record's relative frequencies.
pub fn weighted_record_distance(model: &Model, record: &OutcomeRecord, weights: &CommandWeights) -> Result<f64> {
    weights
        .iter()
        .map(|(cmd, w)| Ok(w * record_distance_for(model, record, cmd)?))
        .sum()
}

/// Largest singular value of `U_α(b) − U_β(b)`.
pub fn spectral_norm_diff(ua: &UnitaryFn, ub: &UnitaryFn, b: &Command) -> Result<f64> {
    let (x, y) = match (ua.get(b), ub.get(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(StatError::CommandNotInSet(b.clone())),
    };
    if x.shape() != y.shape() {
        return Err(StatError::DimensionMismatch(x.nrows(), y.nrows()));
    }
    Ok(spectral_norm(&(x - y)))
}

/// `⌈ε⁻²⌉`: fewer trials cannot separate gate models at spectral-norm
/// distance `ε`.
pub fn min_sample_size(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(StatError::BadEpsilon(epsilon));
    }
    let x = epsilon.powi(-2);
    // absorb rounding in ε² so that e.g. ε = 0.1 gives 100, not 101
    Ok((x * (1.0 - 1e-12)).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    FavorP,
    FavorQ,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrimination {
    pub verdict: Verdict,
    pub log_ratio: f64,
}

/// Log-likelihood-ratio test between two fully specified distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodRatioTest {
    pub threshold: f64,
}

impl Default for LikelihoodRatioTest {
    /// `ln 19`: 95/5 posterior odds under equal priors.
    fn default() -> Self {
        Self { threshold: 19f64.ln() }
    }
}

impl LikelihoodRatioTest {
    pub fn log_ratio(&self, tallies: &[u64], p: &Distribution, q: &Distribution) -> Result<f64> {
        if p.len() != q.len() {
            return Err(StatError::LengthMismatch(p.len(), q.len()));
        }
        if tallies.len() != p.len() {
            return Err(StatError::LengthMismatch(tallies.len(), p.len()));
        }
        if tallies.iter().all(|n| *n == 0) {
            return Err(StatError::BadSampleSize);
        }
        Ok(tallies
            .iter()
            .zip(p.probs().iter().zip(q.probs()))
            .filter(|(n, _)| **n > 0)
            .map(|(&n, (&pj, &qj))| n as f64 * ((pj + LRT_SMOOTHING).ln() - (qj + LRT_SMOOTHING).ln()))
            .sum())
    }

    pub fn discriminate(&self, tallies: &[u64], p: &Distribution, q: &Distribution) -> Result<Discrimination> {
        let log_ratio = self.log_ratio(tallies, p, q)?;
        let verdict = if log_ratio > self.threshold {
            Verdict::FavorP
        } else if log_ratio < -self.threshold {
            Verdict::FavorQ
        } else {
            Verdict::Undecided
        };
        Ok(Discrimination { verdict, log_ratio })
    }
}

/// [`LikelihoodRatioTest::discriminate`] at the default threshold.
pub fn discriminate(tallies: &[u64], p: &Distribution, q: &Distribution) -> Result<Discrimination> {
    LikelihoodRatioTest::default().discriminate(tallies, p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis, diag, random_state, random_unitary, C64, ONE};
    use crate::qm_model::{
        construct_fitting_model, HilbertSpace, MeasurementFn, OutcomeRecord, PhaseAssignment, Spectral, StateFn,
    };
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(statistical_distance(&p, &p).unwrap(), 0.0);
        assert!((statistical_distance(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let d = statistical_distance(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((d - 0.5f64.sqrt().acos()).abs() < 1e-15);
        assert!((d - FRAC_PI_4).abs() < 1e-15);
        assert!(matches!(
            statistical_distance(&p, &dist(&[1.0])),
            Err(StatError::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        assert!(serde_json::from_str::<Distribution>("[0.25, 0.75]").is_ok());
    }

    #[test]
    fn trial_criterion() {
        let p = dist(&[1.0, 0.0]);
        let q = dist(&[0.5, 0.5]);
        assert!(indistinguishable_in_trials(&p, &p, 1_000_000).unwrap());
        assert!(indistinguishable_in_trials(&p, &q, 1).unwrap());
        assert!(!indistinguishable_in_trials(&p, &q, 2).unwrap());
        assert!(!indistinguishable_in_trials(&p, &dist(&[0.0, 1.0]), 1).unwrap());
        assert_eq!(indistinguishable_in_trials(&p, &q, 0), Err(StatError::BadSampleSize));
    }

    #[test]
    fn vector_bound_examples() {
        let a = basis(2, 0);
        assert_eq!(vector_distance_bound(&a, &a).unwrap(), 0.0);
        assert!((vector_distance_bound(&a, &basis(2, 1)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let h = CVector::from_column_slice(&[C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]);
        assert!((vector_distance_bound(&a, &h).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!(vector_distance_bound(&a, &basis(3, 0)).is_err());
    }

    #[test]
    fn spectral_norm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = Command::from_binary("1").unwrap();
        let u = random_unitary(3, &mut rng);
        let ua = UnitaryFn::constant([&b], u.clone());
        assert!(spectral_norm_diff(&ua, &ua, &b).unwrap() < 1e-15);
        let theta = 0.37;
        let ub = UnitaryFn::constant([&b], u * C64::from_polar(1.0, theta));
        let expected = 2.0 * (theta / 2.0).sin().abs();
        assert!((spectral_norm_diff(&ua, &ub, &b).unwrap() - expected).abs() < 1e-12);

        let id = UnitaryFn::constant([&b], diag(&[ONE, ONE]));
        let dg = UnitaryFn::constant([&b], diag(&[ONE, C64::from_polar(1.0, -1.1)]));
        assert!((spectral_norm_diff(&id, &dg, &b).unwrap() - 2.0 * (0.55f64).sin()).abs() < 1e-12);
        let other = UnitaryFn::identity([&b], 3);
        assert!(matches!(
            spectral_norm_diff(&id, &other, &b),
            Err(StatError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(min_sample_size(0.1).unwrap(), 100);
        assert_eq!(min_sample_size(1.0).unwrap(), 1);
        assert_eq!(min_sample_size(0.05).unwrap(), 400);
        assert_eq!(min_sample_size(0.2).unwrap(), 25);
        assert_eq!(min_sample_size(2.0).unwrap(), 1);
        assert_eq!(min_sample_size(0.3).unwrap(), 12);
        assert!(min_sample_size(0.0).is_err());
        assert!(min_sample_size(-1.0).is_err());
        assert!(min_sample_size(f64::NAN).is_err());
    }

    #[test]
    fn lrt_examples() {
        let p = dist(&[0.9, 0.1]);
        let q = dist(&[0.5, 0.5]);
        let d = discriminate(&[90, 10], &p, &q).unwrap();
        let expected = 90.0 * 1.8f64.ln() + 10.0 * 0.2f64.ln();
        assert!((d.log_ratio - expected).abs() < 1e-9);
        assert!((d.log_ratio - 36.8).abs() < 0.1);
        assert_eq!(d.verdict, Verdict::FavorP);
        assert_eq!(discriminate(&[5, 5], &p, &p).unwrap().verdict, Verdict::Undecided);
        assert_eq!(discriminate(&[10, 90], &p, &q).unwrap().verdict, Verdict::FavorQ);
        assert_eq!(discriminate(&[0, 0], &p, &q), Err(StatError::BadSampleSize));
        assert_eq!(
            discriminate(&[900_000, 100_000], &p, &q).unwrap().verdict,
            Verdict::FavorP
        );
    }

    fn fitted(record: &OutcomeRecord) -> Model {
        construct_fitting_model(record, &PhaseAssignment::zero(), record.max_distinct()).unwrap()
    }

    #[test]
    fn weighted_distances() {
        let b0 = Command::from_binary("0").unwrap();
        let b1 = Command::from_binary("1").unwrap();
        let ra = OutcomeRecord::from_observations([
            (b0.clone(), 0.0),
            (b0.clone(), 1.0),
            (b1.clone(), 0.0),
            (b1.clone(), 1.0),
        ]);
        let rb = OutcomeRecord::from_observations([
            (b0.clone(), 0.0),
            (b0.clone(), 1.0),
            (b0.clone(), 1.0),
            (b0.clone(), 1.0),
            (b1.clone(), 1.0),
            (b1.clone(), 0.0),
        ]);
        let a = fitted(&ra);
        let b = fitted(&rb);
        let w = CommandWeights::uniform([&b0, &b1]).unwrap();
        assert_eq!(weighted_model_distance(&a, &a, &w).unwrap(), 0.0);
        let d0 = model_distance_for(&a, &b, &b0).unwrap();
        let d1 = model_distance_for(&a, &b, &b1).unwrap();
        assert!(d1 < 1e-12, "outcome order differs but eigenvalues match");
        assert!((weighted_model_distance(&a, &b, &w).unwrap() - (d0 + d1) / 2.0).abs() < 1e-15);
        assert!(weighted_record_distance(&a, &ra, &w).unwrap() < 1e-9);
        assert!(weighted_record_distance(&b, &rb, &w).unwrap() < 1e-9);

        let stray = CommandWeights::uniform([&Command::from_binary("11").unwrap()]).unwrap();
        assert!(matches!(
            weighted_model_distance(&a, &b, &stray),
            Err(StatError::CommandNotInSet(_))
        ));
        let rc = OutcomeRecord::from_observations([(b0.clone(), 7.0), (b1.clone(), 7.0)]);
        assert!(matches!(
            weighted_record_distance(&a, &rc, &w),
            Err(StatError::SpectraMismatch(_))
        ));
    }

    #[test]
    fn spectra_mismatch_between_models() {
        let b0 = Command::from_binary("0").unwrap();
        let a = fitted(&OutcomeRecord::from_observations([
            (b0.clone(), 0.0),
            (b0.clone(), 1.0),
        ]));
        let c = fitted(&OutcomeRecord::from_observations([
            (b0.clone(), 0.0),
            (b0.clone(), 2.0),
        ]));
        let w = CommandWeights::uniform([&b0]).unwrap();
        assert!(matches!(
            weighted_model_distance(&a, &c, &w),
            Err(StatError::SpectraMismatch(_))
        ));
    }

    #[test]
    fn vector_bound_holds_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = Command::from_binary("1").unwrap();
        for trial in 0..500 {
            let dim = 2 + trial % 5;
            let basis_change = random_unitary(dim, &mut rng);
            let values: Vec<f64> = (0..dim).map(|k| k as f64).collect();
            let m = MeasurementFn::constant([&b], Spectral::diagonal(&values).unwrap().conjugate(&basis_change));
            let va = random_state(dim, &mut rng);
            let vb = random_state(dim, &mut rng);
            let space = HilbertSpace::new(dim).unwrap();
            let ma = Model::with_identity(
                space,
                StateFn::new([(b.clone(), va.clone())].into_iter().collect()).unwrap(),
                m.clone(),
            )
            .unwrap();
            let mb = Model::with_identity(
                space,
                StateFn::new([(b.clone(), vb.clone())].into_iter().collect()).unwrap(),
                m,
            )
            .unwrap();
            let d = model_distance_for(&ma, &mb, &b).unwrap();
            assert!(d <= vector_distance_bound(&va, &vb).unwrap() + 1e-9);
        }
    }

    #[test]
    fn gate_gap_bounds_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let b = Command::from_binary("1").unwrap();
        for _ in 0..200 {
            let dim = 2 + rand::Rng::random_range(&mut rng, 0..3);
            let ua = random_unitary(dim, &mut rng);
            let ub = random_unitary(dim, &mut rng);
            let eps = spectral_norm(&(&ua - &ub));
            let v = random_state(dim, &mut rng);
            let bound = vector_distance_bound(&(&ua * &v), &(&ub * &v)).unwrap();
            assert!(bound <= eps + 1e-9);
            let m = Spectral::diagonal(&(0..dim).map(|k| k as f64).collect::<Vec<_>>())
                .unwrap()
                .conjugate(&random_unitary(dim, &mut rng));
            let pa = Distribution::new(
                m.components()
                    .iter()
                    .map(|c| (ua.clone() * &v).dotc(&(&c.projector * (&ua * &v))).re)
                    .collect(),
            )
            .unwrap();
            let pb = Distribution::new(
                m.components()
                    .iter()
                    .map(|c| (ub.clone() * &v).dotc(&(&c.projector * (&ub * &v))).re)
                    .collect(),
            )
            .unwrap();
            assert!(statistical_distance(&pa, &pb).unwrap() <= eps + 1e-6);
            let _ = &b;
        }
    }

    fn arb_dist(len: usize) -> impl Strategy<Value = Distribution> {
        proptest::collection::vec(0.0f64..1.0, len).prop_filter_map("zero mass", |raw| {
            let s: f64 = raw.iter().sum();
            (s > 1e-6).then(|| Distribution::new(raw.iter().map(|x| x / s).collect()).unwrap())
        })
    }

    fn arb_triple() -> impl Strategy<Value = (Distribution, Distribution, Distribution)> {
        (2usize..=8).prop_flat_map(|n| (arb_dist(n), arb_dist(n), arb_dist(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn metric_properties((p, q, r) in arb_triple()) {
            let pq = statistical_distance(&p, &q).unwrap();
            let qp = statistical_distance(&q, &p).unwrap();
            let pr = statistical_distance(&p, &r).unwrap();
            let qr = statistical_distance(&q, &r).unwrap();
            prop_assert!((0.0..=FRAC_PI_2 + 1e-15).contains(&pq));
            prop_assert!((pq - qp).abs() < 1e-15);
            prop_assert!(statistical_distance(&p, &p).unwrap() < 1e-6);
            prop_assert!(pr <= pq + qr + 1e-9);
        }

        #[test]
        fn sample_size_monotone(a in 1e-3f64..2.0, b in 1e-3f64..2.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(min_sample_size(lo).unwrap() >= min_sample_size(hi).unwrap());
        }
    }
}
