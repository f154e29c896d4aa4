use std::f64::consts::{FRAC_PI_2, PI};

use super::{MeasurementFn, Model, QmError, Result, Spectral};
use crate::command::Command;
use crate::linalg::{basis, outer, CMatrix, C64};

/// Relative phases tried for every basis pair.
pub const WITNESS_PHASES: [f64; 4] = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];

/// A measurement separating two models, with the probabilities each assigns
/// to its first outcome on the separating command.
#[derive(Debug, Clone)]
pub struct Witness {
    pub command: Command,
    /// 0-based basis indices spanned by the witness projector.
    pub pair: (usize, usize),
    pub phase: f64,
    pub projector: CMatrix,
    pub measurement: MeasurementFn,
    pub prob_a: f64,
    pub prob_b: f64,
    pub gap: f64,
}

/// Projectors onto `(|k⟩ + e^{iθ}|l⟩)/√2` for `k < l` and θ in
/// [`WITNESS_PHASES`], in enumeration order.
pub fn witness_family(dim: usize) -> Vec<((usize, usize), f64, CMatrix)> {
    let mut out = Vec::new();
    for k in 0..dim {
        for l in k + 1..dim {
            for &theta in &WITNESS_PHASES {
                let psi = (basis(dim, k) + basis(dim, l) * C64::from_polar(1.0, theta))
                    * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                out.push(((k, l), theta, outer(&psi, &psi)));
            }
        }
    }
    out
}

/// Searches the witness family over every shared command and returns the
/// measurement with the largest probability gap `|Pr_A − Pr_B|`. Ties keep the
/// first candidate in command, pair, phase order.
pub fn distinguish_by_witness(a: &Model, b: &Model) -> Result<Witness> {
    if a.dim() != b.dim() {
        return Err(QmError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.commands().len() != b.commands().len() || !a.commands().iter().all(|c| b.commands().contains(c)) {
        return Err(QmError::CommandSetMismatch);
    }
    let dim = a.dim();
    let mut family = witness_family(dim);
    if family.is_empty() {
        family.push(((0, 0), 0.0, CMatrix::identity(dim, dim)));
    }
    let mut best: Option<(Command, usize, f64, f64, f64)> = None;
    for cmd in a.commands() {
        let psi_a = a.evolved_state(cmd)?;
        let psi_b = b.evolved_state(cmd)?;
        for (idx, (_, _, p)) in family.iter().enumerate() {
            let pa = psi_a.dotc(&(p * &psi_a)).re;
            let pb = psi_b.dotc(&(p * &psi_b)).re;
            let gap = (pa - pb).abs();
            if best.as_ref().is_none_or(|(_, _, g, _, _)| gap > *g) {
                best = Some((cmd.clone(), idx, gap, pa, pb));
            }
        }
    }
    let (command, idx, gap, prob_a, prob_b) = best.ok_or(QmError::CommandSetMismatch)?;
    let (pair, phase, projector) = family.swap_remove(idx);
    let spectral = Spectral::binary(projector.clone()).map_err(|reason| QmError::InvalidMeasurement {
        command: command.clone(),
        reason,
    })?;
    Ok(Witness {
        command,
        pair,
        phase,
        measurement: MeasurementFn::constant(a.commands(), spectral),
        projector,
        prob_a: super::clamp_probability(prob_a)?,
        prob_b: super::clamp_probability(prob_b)?,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qm_model::{construct_fitting_model, OutcomeRecord, PhaseAssignment};

    fn even_record() -> (Command, OutcomeRecord) {
        let b = Command::from_binary("11").unwrap();
        let r = OutcomeRecord::from_observations([(b.clone(), 0.0), (b.clone(), 1.0)]);
        (b, r)
    }

    /// Brute-force gap on the `(|1⟩ + |2⟩)/√2` witness with closed form
    /// `|cos²(Δφ/2) − 1|` between a zero-phase model and one with Δφ.
    fn closed_form_gap(delta: f64) -> f64 {
        (1.0 - (delta / 2.0).cos().powi(2)).abs()
    }

    #[test]
    fn identical_models_have_zero_gap() {
        let (_, r) = even_record();
        let m = construct_fitting_model(&r, &PhaseAssignment::zero(), 3).unwrap();
        assert_eq!(distinguish_by_witness(&m, &m).unwrap().gap, 0.0);
    }

    #[test]
    fn phase_pi_gives_full_gap() {
        let (b, r) = even_record();
        let a = construct_fitting_model(&r, &PhaseAssignment::zero(), 2).unwrap();
        let c = construct_fitting_model(&r, &PhaseAssignment::zero().with_phase(&b, 2, PI), 2).unwrap();
        let w = distinguish_by_witness(&a, &c).unwrap();
        assert!((w.gap - 1.0).abs() < 1e-12);
        assert!((w.gap - closed_form_gap(PI)).abs() < 1e-12);
        assert_eq!(w.pair, (0, 1));
        assert_eq!(w.phase, 0.0);
    }

    #[test]
    fn phase_half_pi_gives_half_gap() {
        let (b, r) = even_record();
        let a = construct_fitting_model(&r, &PhaseAssignment::zero(), 2).unwrap();
        let c = construct_fitting_model(&r, &PhaseAssignment::zero().with_phase(&b, 2, FRAC_PI_2), 2).unwrap();
        let w = distinguish_by_witness(&a, &c).unwrap();
        assert!((w.gap - 0.5).abs() < 1e-12);
        assert!((w.gap - closed_form_gap(FRAC_PI_2)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let (_, r) = even_record();
        let a = construct_fitting_model(&r, &PhaseAssignment::zero(), 2).unwrap();
        let c = construct_fitting_model(&r, &PhaseAssignment::zero(), 3).unwrap();
        assert!(matches!(
            distinguish_by_witness(&a, &c),
            Err(QmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn family_size() {
        assert_eq!(witness_family(4).len(), 6 * 4);
        assert!(witness_family(1).is_empty());
    }
}
