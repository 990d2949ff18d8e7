//! Factor initialization: K-means++ seeding and nonnegative double SVD.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Problems with `min(M, N)` above this use the randomized range finder.
pub const EXACT_SVD_LIMIT: usize = 512;
const OVERSAMPLING: usize = 8;
const POWER_PASSES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitKind {
    KMeansPlusPlus,
    Svd,
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "KMEANSPP" | "KMEANS++" => Ok(Self::KMeansPlusPlus),
            "SVD" => Ok(Self::Svd),
            other => Err(Error::InvalidArgument(format!("unknown init method {other:?}"))),
        }
    }
}

impl std::fmt::Display for InitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::KMeansPlusPlus => "KMEANSPP",
            Self::Svd => "SVD",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitMethod {
    pub kind: InitKind,
    pub seed: u64,
}

impl InitMethod {
    pub fn new(kind: InitKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Row indices chosen by D²-weighted sequential sampling.
pub fn kmeanspp_indices(x: &DenseMatrix, k: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let m = x.rows();
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "K-means++ needs 1 <= K <= M, got K = {k}, M = {m}"
        )));
    }
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..m));
    let mut dist: Vec<f64> = (0..m)
        .map(|i| squared_distance(x.row(i), x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just above the running sum.
            pick.unwrap_or_else(|| dist.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            // Fewer distinct rows than K: fall back to an unused index.
            let free: Vec<usize> = (0..m).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), x.row(next)));
        }
    }
    Ok(chosen)
}

/// `K` centroids drawn from the rows of `x` by K-means++ seeding.
pub fn kmeanspp_centroids(x: &DenseMatrix, k: usize, seed: u64) -> Result<DenseMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = kmeanspp_indices(x, k, &mut rng)?;
    Ok(x.select_rows(&idx))
}

/// Index of the closest centroid (squared Euclidean, first minimizer).
pub(crate) fn nearest(row: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = squared_distance(row, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub(crate) fn one_hot(labels: &[usize], k: usize) -> DenseMatrix {
    DenseMatrix::from_fn(labels.len(), k, |i, j| if labels[i] == j { 1.0 } else { 0.0 })
}

/// Leading `k` singular triplets `(U_k, s, V_kᵀ)`, descending.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub left: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right_t: DenseMatrix,
}

fn svd_sorted(a: &DMatrix<f64>, k: usize) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Svd("iteration did not converge".into()))?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Svd("singular vectors missing".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    order.truncate(k);
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    Ok((u, s, vt))
}

fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Randomized range finder with power passes followed by an exact SVD of
/// the projected matrix.
pub fn randomized_svd(x: &DenseMatrix, k: usize, seed: u64) -> Result<TruncatedSvd> {
    let a = x.to_nalgebra();
    let (m, n) = a.shape();
    let l = (k + OVERSAMPLING).min(m.min(n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(n, l, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = orthonormal_basis(&a * omega);
    for _ in 0..POWER_PASSES {
        let z = orthonormal_basis(a.transpose() * &q);
        q = orthonormal_basis(&a * z);
    }
    let b = q.transpose() * &a;
    let (ub, s, vt) = svd_sorted(&b, k)?;
    let u = q * ub;
    Ok(TruncatedSvd {
        left: DenseMatrix::from_nalgebra(&u),
        singular_values: s,
        right_t: DenseMatrix::from_nalgebra(&vt),
    })
}

/// Rank-`k` SVD, exact for desk-sized problems and randomized otherwise.
pub fn truncated_svd(x: &DenseMatrix, k: usize, seed: u64) -> Result<TruncatedSvd> {
    if k == 0 || k > x.rows().min(x.cols()) {
        return Err(Error::InvalidArgument(format!(
            "rank {k} out of range for a {}x{} matrix",
            x.rows(),
            x.cols()
        )));
    }
    if x.rows().min(x.cols()) > EXACT_SVD_LIMIT {
        return randomized_svd(x, k, seed);
    }
    let (u, s, vt) = svd_sorted(&x.to_nalgebra(), k)?;
    Ok(TruncatedSvd {
        left: DenseMatrix::from_nalgebra(&u),
        singular_values: s,
        right_t: DenseMatrix::from_nalgebra(&vt),
    })
}

fn split_signs(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pos = v.iter().map(|&a| a.max(0.0)).collect();
    let neg = v.iter().map(|&a| (-a).max(0.0)).collect();
    (pos, neg)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Nonnegative double SVD. Exact zeros are kept; see [`fill_zeros_average`].
pub fn nndsvd(x: &DenseMatrix, k: usize, seed: u64) -> Result<(DenseMatrix, DenseMatrix)> {
    let svd = truncated_svd(x, k, seed)?;
    let s0 = svd.singular_values[0];
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(Error::Svd(format!("leading singular value is {s0}")));
    }
    let (m, n) = x.shape();
    let mut u = DenseMatrix::zeros(m, k);
    let mut v = DenseMatrix::zeros(k, n);
    for j in 0..k {
        let sj = svd.singular_values[j];
        let left = svd.left.column(j);
        let right = svd.right_t.row(j).to_vec();
        let (col, row, weight) = if j == 0 {
            let col: Vec<f64> = left.iter().map(|a| a.abs()).collect();
            let row: Vec<f64> = right.iter().map(|a| a.abs()).collect();
            (col, row, sj)
        } else {
            let (lp, ln) = split_signs(&left);
            let (rp, rn) = split_signs(&right);
            let (nlp, nln, nrp, nrn) = (norm(&lp), norm(&ln), norm(&rp), norm(&rn));
            let (mp, mn) = (nlp * nrp, nln * nrn);
            let (a, b, na, nb, mass) = if mp > mn {
                (lp, rp, nlp, nrp, mp)
            } else {
                (ln, rn, nln, nrn, mn)
            };
            if mass == 0.0 {
                (vec![0.0; m], vec![0.0; n], 0.0)
            } else {
                let a = a.iter().map(|v| v / na).collect();
                let b = b.iter().map(|v| v / nb).collect();
                (a, b, sj * mass)
            }
        };
        let scale = weight.sqrt();
        for (i, c) in col.iter().enumerate() {
            u.set(i, j, scale * c);
        }
        for (c, r) in row.iter().enumerate() {
            v.set(j, c, scale * r);
        }
    }
    Ok((u, v))
}

/// Replaces exact zeros of both factors by `mean(X) / K`.
pub fn fill_zeros_average(u: &mut DenseMatrix, v: &mut DenseMatrix, x: &DenseMatrix) {
    let fill = x.mean() / u.cols() as f64;
    for a in u.as_mut_slice().iter_mut().chain(v.as_mut_slice()) {
        if *a == 0.0 {
            *a = fill;
        }
    }
}

/// Initial `(U₀, V₀)` for the chosen method. K-means++ yields the binary
/// nearest-centroid assignment and the centroids themselves.
pub fn init_factors(x: &DenseMatrix, k: usize, method: InitMethod) -> Result<(DenseMatrix, DenseMatrix)> {
    if k == 0 || k > x.rows().min(x.cols()) {
        return Err(Error::InvalidArgument(format!(
            "K = {k} must lie in 1..=min(M, N) = {}",
            x.rows().min(x.cols())
        )));
    }
    match method.kind {
        InitKind::Svd => nndsvd(x, k, method.seed),
        InitKind::KMeansPlusPlus => {
            let centroids = kmeanspp_centroids(x, k, method.seed)?;
            let labels: Vec<usize> = (0..x.rows()).map(|i| nearest(x.row(i), &centroids).0).collect();
            Ok((one_hot(&labels, k), centroids))
        }
    }
}
