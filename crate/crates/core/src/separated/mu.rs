use crate::error::{Error, Result};
use crate::init::{fill_zeros_average, init_factors, InitMethod};
use crate::matrix::{DenseMatrix, ProjectionBounds};

/// Orthogonal multiplicative-update baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MuVariant {
    /// `U ← U ∘ sqrt(XVᵀ / (UUᵀXVᵀ))`.
    Ding,
    /// `U ← U ∘ XVᵀ / (UVXᵀU)`.
    Choi,
}

#[derive(Debug, Clone)]
pub struct MuResult {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// `½‖X − UV‖²` at the start and after every iteration.
    pub discrepancy: Vec<f64>,
}

pub(crate) fn discrepancy(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> f64 {
    0.5 * x.sub(&u.matmul(v).expect("shapes checked")).expect("shapes checked").frobenius_sq()
}

/// Lee–Seung centroid step `V ← V ∘ UᵀX / (UᵀUV)`.
pub(crate) fn v_step(x: &DenseMatrix, u: &DenseMatrix, v: &mut DenseMatrix, bounds: ProjectionBounds) {
    let num = u.matmul_tn(x).expect("shapes checked");
    let den = u.matmul_tn(u).and_then(|g| g.matmul(v)).expect("shapes checked");
    v.multiplicative_update(&num, &den, bounds);
}

fn u_step(variant: MuVariant, x: &DenseMatrix, u: &mut DenseMatrix, v: &DenseMatrix, bounds: ProjectionBounds) {
    let xvt = x.matmul_nt(v).expect("shapes checked");
    match variant {
        MuVariant::Ding => {
            let den = u.matmul(&u.matmul_tn(&xvt).expect("shapes checked")).expect("shapes checked");
            let ratio = DenseMatrix::from_fn(u.rows(), u.cols(), |i, j| {
                (xvt.get(i, j) / den.get(i, j).max(f64::MIN_POSITIVE)).sqrt()
            });
            u.multiplicative_update(&ratio, &DenseMatrix::filled(u.rows(), u.cols(), 1.0), bounds);
        }
        MuVariant::Choi => {
            // VXᵀU = (XVᵀ)ᵀU is K×K.
            let small = xvt.matmul_tn(u).expect("shapes checked");
            let den = u.matmul(&small).expect("shapes checked");
            u.multiplicative_update(&xvt, &den, bounds);
        }
    }
}

/// Runs `i_max` alternating U/V multiplicative updates from the chosen
/// initialization. Zero entries of the initial factors are filled with
/// `mean(X)/K` and everything is clamped to the projection bounds.
pub fn onmf_multiplicative(
    x: &DenseMatrix,
    k: usize,
    variant: MuVariant,
    init: InitMethod,
    i_max: usize,
) -> Result<MuResult> {
    if x.min_value() < 0.0 {
        return Err(Error::InvalidArgument("data matrix must be nonnegative".into()));
    }
    let bounds = ProjectionBounds::default();
    let (mut u, mut v) = init_factors(x, k, init)?;
    fill_zeros_average(&mut u, &mut v, x);
    u.clamp_strict_positive_in_place(bounds);
    v.clamp_strict_positive_in_place(bounds);
    let mut trace = Vec::with_capacity(i_max + 1);
    trace.push(discrepancy(x, &u, &v));
    for _ in 0..i_max {
        u_step(variant, x, &mut u, &v, bounds);
        v_step(x, &u, &mut v, bounds);
        trace.push(discrepancy(x, &u, &v));
    }
    Ok(MuResult {
        u,
        v,
        discrepancy: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::InitKind;
    use crate::metrics::score;
    use crate::separated::harden;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn planted(m: usize, n: usize, k: usize, noise: f64, seed: u64) -> (DenseMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth: Vec<usize> = (0..m).map(|i| i % k).collect();
        let centroids = DenseMatrix::from_fn(k, n, |c, j| if j % k == c { 1.0 + rng.random_range(0.0..1.0) } else { 0.05 });
        let x = DenseMatrix::from_fn(m, n, |i, j| {
            (centroids.get(truth[i], j) + noise * rng.random_range(-1.0..1.0)).max(0.0)
        });
        (x, truth)
    }

    #[test]
    fn planted_partition_is_recovered() {
        let (x, truth) = planted(200, 50, 4, 0.05, 1);
        for variant in [MuVariant::Ding, MuVariant::Choi] {
            let r = onmf_multiplicative(&x, 4, variant, InitMethod::new(InitKind::Svd, 0), 300).unwrap();
            let labels = harden(&r.u, 0);
            let s = score(labels.as_slice(), &truth, 4).unwrap();
            assert!(s.vd_n <= 0.05, "{variant:?}: VDn = {}", s.vd_n);
        }
    }

    #[test]
    fn v_step_does_not_increase_discrepancy() {
        let (x, _) = planted(40, 12, 3, 0.2, 2);
        let bounds = ProjectionBounds::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = DenseMatrix::from_fn(40, 3, |_, _| rng.random_range(0.1..1.0));
        let mut v = DenseMatrix::from_fn(3, 12, |_, _| rng.random_range(0.1..1.0));
        for _ in 0..50 {
            let before = discrepancy(&x, &u, &v);
            v_step(&x, &u, &mut v, bounds);
            assert!(discrepancy(&x, &u, &v) <= before * (1.0 + 1e-12));
        }
    }

    #[test]
    fn single_cluster_converges_to_unit_norm() {
        // With K = 1 the Ding rule only has fixed points where uᵀu = 1. The
        // Choi rule instead alternates between norms r and 1/r.
        let (x, _) = planted(30, 10, 3, 0.1, 4);
        let r = onmf_multiplicative(&x, 1, MuVariant::Ding, InitMethod::new(InitKind::Svd, 0), 500).unwrap();
        assert!(r.u.min_value() > 0.0);
        let gram = r.u.matmul_tn(&r.u).unwrap().get(0, 0);
        assert!((gram - 1.0).abs() < 1e-6, "{gram}");
    }

    #[test]
    fn factors_stay_within_bounds() {
        let (x, _) = planted(30, 10, 3, 0.1, 5);
        let b = ProjectionBounds::default();
        for variant in [MuVariant::Ding, MuVariant::Choi] {
            let r = onmf_multiplicative(&x, 3, variant, InitMethod::new(InitKind::KMeansPlusPlus, 1), 50).unwrap();
            for m in [&r.u, &r.v] {
                assert!(m.min_value() >= b.lower && m.max_value() <= b.upper);
            }
        }
    }

    #[test]
    fn rejects_negative_data() {
        let x = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 0.5]]).unwrap();
        assert!(onmf_multiplicative(&x, 1, MuVariant::Ding, InitMethod::new(InitKind::Svd, 0), 1).is_err());
    }
}
