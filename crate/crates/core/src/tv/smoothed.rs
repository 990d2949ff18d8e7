use super::NeighborGraph;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

fn check_rows(u: &DenseMatrix, nb: &NeighborGraph, op: &'static str) -> Result<()> {
    if u.rows() != nb.len() {
        return Err(Error::dims(op, u.shape(), (nb.len(), u.cols())));
    }
    Ok(())
}

/// `|∇_{mk} U| = sqrt(eps² + Σ_{m̃ ∈ N_m} (U_mk − U_m̃k)²)` for every entry.
pub fn local_gradient_norms(u: &DenseMatrix, nb: &NeighborGraph, eps_tv: f64) -> Result<DenseMatrix> {
    check_rows(u, nb, "local_gradient_norms")?;
    let eps2 = eps_tv * eps_tv;
    Ok(DenseMatrix::from_fn(u.rows(), u.cols(), |m, k| {
        let center = u.get(m, k);
        let sq: f64 = nb
            .forward(m)
            .iter()
            .map(|&n| (center - u.get(n, k)).powi(2))
            .sum();
        (eps2 + sq).sqrt()
    }))
}

/// Smoothed isotropic TV `Σ_k Σ_m |∇_{mk} U|`.
pub fn tv_eps_value(u: &DenseMatrix, nb: &NeighborGraph, eps_tv: f64) -> Result<f64> {
    if eps_tv < 0.0 {
        return Err(Error::InvalidArgument(format!("eps_tv must be nonnegative, got {eps_tv}")));
    }
    Ok(local_gradient_norms(u, nb, eps_tv)?.as_slice().iter().sum())
}

/// Weights `P(U)` and targets `Z(U)` of the quadratic TV majorizer
/// `Σ P (U − Z)² + C`.
#[derive(Debug, Clone)]
pub struct TvSurrogate {
    pub p: DenseMatrix,
    pub z: DenseMatrix,
    /// Entries `(m, k)` with `P = 0`; there `Z` is set to `U_mk`.
    pub isolated: Vec<(usize, usize)>,
}

pub fn tv_surrogate(u: &DenseMatrix, nb: &NeighborGraph, eps_tv: f64) -> Result<TvSurrogate> {
    let grad = local_gradient_norms(u, nb, eps_tv)?;
    let (rows, cols) = u.shape();
    let mut p = DenseMatrix::zeros(rows, cols);
    let mut z = DenseMatrix::zeros(rows, cols);
    let mut isolated = Vec::new();
    for m in 0..rows {
        let fwd = nb.forward(m);
        let adj = nb.adjoint(m);
        for k in 0..cols {
            let center = u.get(m, k);
            let mut weight = 0.0;
            let mut target = 0.0;
            if !fwd.is_empty() {
                let g = grad.get(m, k);
                if g == 0.0 {
                    return Err(Error::VanishingGradient { row: m, col: k });
                }
                weight += fwd.len() as f64 / g;
                target += fwd.iter().map(|&n| 0.5 * (center + u.get(n, k))).sum::<f64>() / g;
            }
            for &n in adj {
                let g = grad.get(n, k);
                if g == 0.0 {
                    return Err(Error::VanishingGradient { row: n, col: k });
                }
                weight += 1.0 / g;
                target += 0.5 * (center + u.get(n, k)) / g;
            }
            p.set(m, k, weight);
            if weight > 0.0 {
                z.set(m, k, target / weight);
            } else {
                z.set(m, k, center);
                isolated.push((m, k));
            }
        }
    }
    Ok(TvSurrogate { p, z, isolated })
}

/// `P(U)_{mk} = |N_m| / |∇_{mk}U| + Σ_{m̃ ∈ N̄_m} 1 / |∇_{m̃k}U|`.
pub fn tv_weights_p(u: &DenseMatrix, nb: &NeighborGraph, eps_tv: f64) -> Result<DenseMatrix> {
    Ok(tv_surrogate(u, nb, eps_tv)?.p)
}

/// Weighted neighbour midpoints `Z(U)`; entries with `P = 0` equal `U`.
pub fn tv_targets_z(u: &DenseMatrix, nb: &NeighborGraph, eps_tv: f64) -> Result<DenseMatrix> {
    Ok(tv_surrogate(u, nb, eps_tv)?.z)
}
