use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CpcError, Result};
use crate::linalg::{is_unitary, random_matrix_with_norm, random_unitary, spectral_norm, CMatrix};

/// Error of a perturbed gate sequence against the ideal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateErrorReport {
    pub gates: usize,
    pub epsilon: f64,
    /// `‖Π(U_j + E_j) − Π U_j‖` for the drawn perturbations.
    pub measured: f64,
    /// First-order bound `K·ε`.
    pub first_order_bound: f64,
    /// Exact bound `(1 + ε)^K − 1`.
    pub exact_bound: f64,
}

/// Perturbs each gate by a random `E_j` with `‖E_j‖ = ε` and compares the
/// products. The product is taken in application order, last gate leftmost.
pub fn gate_sequence_error(gates: &[CMatrix], epsilon: f64, rng: &mut ChaCha8Rng) -> Result<GateErrorReport> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(CpcError::Config(format!(
            "per-gate error {epsilon} is not a finite non-negative number"
        )));
    }
    let k = gates.len();
    let report = |measured| GateErrorReport {
        gates: k,
        epsilon,
        measured,
        first_order_bound: k as f64 * epsilon,
        exact_bound: (1.0 + epsilon).powi(k as i32) - 1.0,
    };
    let Some(first) = gates.first() else {
        return Ok(report(0.0));
    };
    let dim = first.nrows();
    for (j, g) in gates.iter().enumerate() {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(CpcError::DimensionMismatch {
                expected: dim,
                found: g.nrows(),
            });
        }
        if !is_unitary(g, 1e-9) {
            return Err(CpcError::NotUnitary(j));
        }
    }
    let mut ideal = CMatrix::identity(dim, dim);
    let mut noisy = CMatrix::identity(dim, dim);
    for g in gates {
        let e = random_matrix_with_norm(dim, epsilon, rng);
        ideal = g * ideal;
        noisy = (g + e) * noisy;
    }
    Ok(report(spectral_norm(&(noisy - ideal))))
}

/// Worst measured error over `draws` independent draws of random gates and
/// perturbations; draw `i` is seeded with `seed + i`.
pub fn gate_error_trials(k: usize, dim: usize, epsilon: f64, draws: usize, seed: u64) -> Result<Vec<GateErrorReport>> {
    (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let gates: Vec<CMatrix> = (0..k).map(|_| random_unitary(dim, &mut rng)).collect();
            gate_sequence_error(&gates, epsilon, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn zero_error_and_single_gate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gates: Vec<CMatrix> = (0..5).map(|_| random_unitary(3, &mut rng)).collect();
        let r = gate_sequence_error(&gates, 0.0, &mut rng).unwrap();
        assert!(r.measured < 1e-12);
        let r = gate_sequence_error(&gates[..1], 0.01, &mut rng).unwrap();
        assert!((r.measured - 0.01).abs() < 1e-12);
        assert_eq!(gate_sequence_error(&[], 0.1, &mut rng).unwrap().measured, 0.0);
    }

    #[test]
    fn twenty_gates_stay_under_first_order_bound() {
        for r in gate_error_trials(20, 2, 0.005, 50, 11).unwrap() {
            assert!(r.measured <= 0.105, "{r:?}");
            assert!(r.measured <= r.exact_bound + 1e-12);
        }
    }

    #[test]
    fn non_unitary_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = CMatrix::identity(2, 2) * C64::new(2.0, 0.0);
        let good = CMatrix::identity(2, 2);
        assert_eq!(
            gate_sequence_error(&[good, bad], 0.01, &mut rng).unwrap_err(),
            CpcError::NotUnitary(1)
        );
    }
}
