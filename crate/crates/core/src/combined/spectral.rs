use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// Lower bound on eigenvalue estimates so step sizes stay finite.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// How the largest eigenvalue of a symmetric PSD matrix is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Exact,
    /// Power method with the given number of matrix-vector products.
    Power(usize),
}

fn check_square(a: &DenseMatrix) -> Result<()> {
    if a.rows() != a.cols() || a.rows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a nonempty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn mat_vec(a: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|i| dot(a.row(i), v)).collect()
}

/// Power iteration from a uniform random start; returns the Rayleigh
/// quotient of the final normalized iterate.
pub fn power_iteration(a: &DenseMatrix, iters: usize, rng: &mut impl Rng) -> Result<f64> {
    let start: Vec<f64> = (0..a.rows()).map(|_| rng.random::<f64>()).collect();
    power_iteration_from(a, start, iters)
}

/// Power iteration from a caller-supplied start vector.
pub fn power_iteration_from(a: &DenseMatrix, start: Vec<f64>, iters: usize) -> Result<f64> {
    check_square(a)?;
    if start.len() != a.rows() {
        return Err(Error::dims("power_iteration", a.shape(), (start.len(), 1)));
    }
    if iters == 0 {
        return Err(Error::InvalidArgument("power iteration needs at least one step".into()));
    }
    let mut v = start;
    if dot(&v, &v) == 0.0 {
        v.fill(1.0);
    }
    for _ in 0..iters {
        let w = mat_vec(a, &v);
        let norm = dot(&w, &w).sqrt();
        if !(norm > 0.0) {
            return Ok(LAMBDA_FLOOR);
        }
        v = w.into_iter().map(|x| x / norm).collect();
    }
    let av = mat_vec(a, &v);
    Ok((dot(&v, &av) / dot(&v, &v)).max(LAMBDA_FLOOR))
}

/// Largest eigenvalue from a dense symmetric eigensolver.
pub fn exact_lambda_max(a: &DenseMatrix) -> Result<f64> {
    check_square(a)?;
    let eig = SymmetricEigen::new(a.to_nalgebra());
    Ok(eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(LAMBDA_FLOOR))
}

pub fn lambda_max(a: &DenseMatrix, method: EigenMethod, rng: &mut impl Rng) -> Result<f64> {
    match method {
        EigenMethod::Exact => exact_lambda_max(a),
        EigenMethod::Power(iters) => power_iteration(a, iters, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_in_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let l = power_iteration(&DenseMatrix::identity(4), 1, &mut rng).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_converges_within_one_percent() {
        // Equal weight on every eigenvector gives 179196/60074 ≈ 2.983.
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]).unwrap();
        let l = power_iteration_from(&a, vec![1.0; 3], 5).unwrap();
        assert!((l - 179196.0 / 60074.0).abs() < 1e-12);
        assert!(l >= 0.99 * 3.0);
        // Unequal starts converge more slowly but never overshoot.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let start: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..1.0)).collect();
            let l = power_iteration_from(&a, start, 5).unwrap();
            assert!(l <= 3.0 + 1e-12 && l >= 0.97 * 3.0, "{l}");
        }
    }

    #[test]
    fn exact_matches_closed_form() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((exact_lambda_max(&a).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_floored() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = DenseMatrix::zeros(3, 3);
        assert_eq!(power_iteration(&z, 5, &mut rng).unwrap(), LAMBDA_FLOOR);
        assert_eq!(exact_lambda_max(&z).unwrap(), LAMBDA_FLOOR);
    }

    #[test]
    fn rejects_non_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(power_iteration(&DenseMatrix::zeros(2, 3), 5, &mut rng).is_err());
    }
}
