//! Dense complex linear algebra used throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn basis(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// `|a⟩⟨b|`
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn is_unit(v: &CVector, tol: f64) -> bool {
    (v.norm() - 1.0).abs() <= tol
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVector, b: &CVector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `U†U = I` entrywise within `tol`.
pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(u.nrows(), u.ncols())) <= tol
}

/// Hermitian and idempotent within `tol`.
pub fn is_projector(p: &CMatrix, tol: f64) -> bool {
    p.is_square() && max_abs_diff(p, &p.adjoint()) <= tol && max_abs_diff(&(p * p), p) <= tol
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniformly random unit vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Random matrix with spectral norm exactly `norm`.
pub fn random_matrix_with_norm<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> CMatrix {
    let g = random_complex_matrix(dim, dim, rng);
    let s = spectral_norm(&g);
    g * C64::new(norm / s, 0.0)
}

/// `exp(i·h·t)` for a hermitian `h`, via its eigendecomposition.
pub fn expi_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|l| C64::from_polar(1.0, l * t)).collect();
    let v = &eig.eigenvectors;
    v * diag(&phases) * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in 1..7 {
            assert!(is_unitary(&random_unitary(dim, &mut rng), 1e-12));
        }
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = diag(&[C64::new(3.0, 0.0), C64::new(0.0, -5.0)]);
        assert!((spectral_norm(&d) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_random_matrix_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_matrix_with_norm(4, 0.01, &mut rng);
        assert!((spectral_norm(&m) - 0.01).abs() < 1e-14);
    }

    #[test]
    fn exponential_of_pauli_z() {
        let z = diag(&[ONE, -ONE]);
        let u = expi_hermitian(&z, 0.4);
        assert!((u[(0, 0)] - C64::from_polar(1.0, 0.4)).norm() < 1e-12);
        assert!((u[(1, 1)] - C64::from_polar(1.0, -0.4)).norm() < 1e-12);
    }
}
