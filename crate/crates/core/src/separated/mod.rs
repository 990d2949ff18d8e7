//! Cluster first, then TV-denoise the membership matrix column by column.

mod kmeans;
mod labels;
mod mu;

pub use kmeans::{kmeans_cluster, KMeansResult};
pub use labels::{harden, ClusterLabels};
pub use mu::{onmf_multiplicative, MuResult, MuVariant};
pub(crate) use mu::v_step as mu_v_step;

use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::init::{InitKind, InitMethod};
use crate::matrix::DenseMatrix;
use crate::tv::tv_prox_columns;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseMethod {
    KMeans,
    MuDing,
    MuChoi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatedConfig {
    pub base: BaseMethod,
    pub tau: f64,
    /// Iteration cap of the multiplicative bases; K-means stops on stable
    /// assignments instead.
    pub i_max: usize,
    pub init: InitMethod,
    pub prox_iters: usize,
}

impl SeparatedConfig {
    /// Defaults per base: K-means τ=1 from K-means++; Choi τ=2e-2 with 600
    /// iterations from SVD; Ding τ=2e-2 with 800 iterations from K-means++.
    pub fn defaults(base: BaseMethod, seed: u64) -> Self {
        let (tau, i_max, kind) = match base {
            BaseMethod::KMeans => (1.0, 0, InitKind::KMeansPlusPlus),
            BaseMethod::MuChoi => (2e-2, 600, InitKind::Svd),
            BaseMethod::MuDing => (2e-2, 800, InitKind::KMeansPlusPlus),
        };
        Self {
            base,
            tau,
            i_max,
            init: InitMethod::new(kind, seed),
            prox_iters: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be finite and nonnegative, got {}", self.tau)));
        }
        if self.prox_iters == 0 {
            return Err(Error::InvalidArgument("prox_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SeparatedResult {
    /// Membership matrix after denoising and nonnegative projection.
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub labels: ClusterLabels,
}

/// Base clustering, column-wise TV prox of `U`, projection onto `U ≥ 0`,
/// then hardening. With `τ = 0` the prox is skipped entirely.
pub fn onmf_tv_pipeline(
    x: &DenseMatrix,
    k: usize,
    cfg: &SeparatedConfig,
    grid: &GridGeometry,
) -> Result<SeparatedResult> {
    cfg.validate()?;
    if x.rows() != grid.len() {
        return Err(Error::dims("onmf_tv_pipeline", x.shape(), (grid.len(), x.cols())));
    }
    let (u, v) = match cfg.base {
        BaseMethod::KMeans => {
            let r = kmeans_cluster(x, k, cfg.init.seed)?;
            (r.u, r.centroids)
        }
        BaseMethod::MuDing | BaseMethod::MuChoi => {
            let variant = if cfg.base == BaseMethod::MuDing { MuVariant::Ding } else { MuVariant::Choi };
            let r = onmf_multiplicative(x, k, variant, cfg.init, cfg.i_max)?;
            (r.u, r.v)
        }
    };
    let u = if cfg.tau > 0.0 {
        tv_prox_columns(&u, cfg.tau, grid, cfg.prox_iters)?.project_nonnegative()
    } else {
        u.project_nonnegative()
    };
    let labels = harden(&u, cfg.init.seed);
    Ok(SeparatedResult { u, v, labels })
}
