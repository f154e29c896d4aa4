//! How many trials it takes to tell apart two gate models whose unitaries
//! differ by `ε` in spectral norm.

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CpcError, Result};
use crate::linalg::{diag, CVector, C64};
use crate::qm_model::{HilbertSpace, MeasurementFn, Model, Spectral, StateFn, UnitaryFn};
use crate::stat_distance::{
    min_sample_size, model_distance_for, spectral_norm_diff, Distribution, LikelihoodRatioTest, Verdict,
};
use crate::Command;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSizeConfig {
    pub epsilons: Vec<f64>,
    /// Required probability of a correct verdict under either model.
    pub power: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Search gives up above this many trials.
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
}

fn default_repetitions() -> usize {
    500
}

fn default_max_trials() -> u64 {
    1 << 24
}

impl SampleSizeConfig {
    pub fn new(epsilons: Vec<f64>, power: f64, seed: u64) -> Self {
        Self {
            epsilons,
            power,
            repetitions: default_repetitions(),
            seed,
            max_trials: default_max_trials(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(CpcError::Config("no ε values given".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e <= 2.0)) {
            return Err(CpcError::Config(format!("ε = {e} is outside (0, 2]")));
        }
        if !(self.power > 0.5 && self.power < 1.0) {
            return Err(CpcError::Config(format!("power {} is outside (0.5, 1)", self.power)));
        }
        if self.repetitions == 0 || self.max_trials == 0 {
            return Err(CpcError::Config("repetitions and max_trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeRow {
    pub epsilon: f64,
    /// `⌈ε⁻²⌉`.
    pub n_bound: u64,
    /// Smallest trial count reaching the target power; `None` when the
    /// search saturated at `max_trials`.
    pub n_empirical: Option<u64>,
    /// Power measured at `n_empirical` (or at `max_trials` when saturated).
    pub power: f64,
    /// Spectral norm of the unitary difference of the constructed pair.
    pub norm_diff: f64,
    /// Statistical distance of the pair's outcome distributions.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeReport {
    pub rows: Vec<SampleSizeRow>,
    /// Least-squares slope of `ln N_empirical` against `ln ε`.
    pub slope: Option<f64>,
}

/// Two one-qubit models that differ only in the unitary:
/// `U_α = 1` and `U_β = diag(e^{ia}, e^{ib})` with `|1 − e^{ia}| = |1 − e^{ib}| = ε`
/// and the relative phase `a − b` as large as that allows. Both prepare `|+⟩`
/// and measure in the `±` basis, the direction most sensitive to the phase.
pub fn model_pair(epsilon: f64) -> Result<(Model, Model, Command)> {
    let a = 2.0 * (epsilon / 2.0).min(1.0).asin();
    let b = a - (2.0 * a).min(std::f64::consts::PI);
    let cmd = Command::from_binary("1").expect("literal command");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]);
    let minus = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(-h, 0.0)]);
    let spectral = Spectral::new(vec![
        crate::qm_model::Eigenspace {
            value: 1.0,
            projector: &plus * plus.adjoint(),
        },
        crate::qm_model::Eigenspace {
            value: -1.0,
            projector: &minus * minus.adjoint(),
        },
    ])
    .map_err(CpcError::Config)?;
    let space = HilbertSpace::new(2)?;
    let v = StateFn::new(IndexMap::from([(cmd.clone(), plus.clone())]))?;
    let m = MeasurementFn::constant([&cmd], spectral);
    let alpha = Model::new(space, v.clone(), UnitaryFn::identity([&cmd], 2), m.clone())?;
    let u_beta = diag(&[C64::from_polar(1.0, a), C64::from_polar(1.0, b)]);
    let beta = Model::new(space, v, UnitaryFn::new(IndexMap::from([(cmd.clone(), u_beta)]))?, m)?;
    Ok((alpha, beta, cmd))
}

fn clamped(probs: Vec<f64>) -> Result<Distribution> {
    let probs: Vec<f64> = probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    Ok(Distribution::new(probs)?)
}

/// Probability that the likelihood-ratio test names the right model after
/// `n` trials, the smaller of the rates under α and under β. Binary outcomes
/// only. Repetition `r` uses its own stream of the generator seeded by `seed`.
pub fn power_at(p: &Distribution, q: &Distribution, n: u64, repetitions: usize, seed: u64) -> Result<f64> {
    if p.len() != 2 || q.len() != 2 {
        return Err(CpcError::Config(
            "power estimation needs two-outcome distributions".into(),
        ));
    }
    let test = LikelihoodRatioTest::default();
    let draw = |prob: f64, rng: &mut ChaCha8Rng| -> u64 {
        Binomial::new(n, prob.clamp(0.0, 1.0))
            .expect("valid binomial")
            .sample(rng)
    };
    let correct: Vec<(bool, bool)> = (0..repetitions)
        .into_par_iter()
        .map(|r| -> Result<(bool, bool)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let k = draw(p.probs()[0], &mut rng);
            let under_p = test.discriminate(&[k, n - k], p, q)?.verdict == Verdict::FavorP;
            let k = draw(q.probs()[0], &mut rng);
            let under_q = test.discriminate(&[k, n - k], p, q)?.verdict == Verdict::FavorQ;
            Ok((under_p, under_q))
        })
        .collect::<Result<_>>()?;
    let rate = |pick: fn(&(bool, bool)) -> bool| correct.iter().filter(|c| pick(c)).count() as f64 / repetitions as f64;
    Ok(rate(|c| c.0).min(rate(|c| c.1)))
}

fn search(p: &Distribution, q: &Distribution, cfg: &SampleSizeConfig, seed: u64) -> Result<(Option<u64>, f64)> {
    let mut lo = 0u64;
    let mut hi = 1u64;
    let mut hi_power;
    loop {
        hi_power = power_at(p, q, hi, cfg.repetitions, seed)?;
        if hi_power >= cfg.power {
            break;
        }
        if hi >= cfg.max_trials {
            return Ok((None, hi_power));
        }
        lo = hi;
        hi = (hi * 2).min(cfg.max_trials);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let power = power_at(p, q, mid, cfg.repetitions, seed)?;
        if power >= cfg.power {
            hi = mid;
            hi_power = power;
        } else {
            lo = mid;
        }
    }
    Ok((Some(hi), hi_power))
}

pub fn sample_size_experiment(cfg: &SampleSizeConfig) -> Result<SampleSizeReport> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    for (i, &epsilon) in cfg.epsilons.iter().enumerate() {
        let (alpha, beta, cmd) = model_pair(epsilon)?;
        let p = clamped(alpha.distribution(&cmd)?)?;
        let q = clamped(beta.distribution(&cmd)?)?;
        let seed = cfg.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (n_empirical, power) = search(&p, &q, cfg, seed)?;
        rows.push(SampleSizeRow {
            epsilon,
            n_bound: min_sample_size(epsilon)?,
            n_empirical,
            power,
            norm_diff: spectral_norm_diff(alpha.unitaries(), beta.unitaries(), &cmd)?,
            distance: model_distance_for(&alpha, &beta, &cmd)?,
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.n_empirical.map(|n| (r.epsilon.ln(), (n as f64).ln())))
        .collect();
    Ok(SampleSizeReport {
        slope: least_squares_slope(&points),
        rows,
    })
}

/// Slope of the least-squares line through `points`; `None` for fewer than
/// two distinct abscissae.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
