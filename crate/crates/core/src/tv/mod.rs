//! Total-variation machinery: neighbourhood graphs, the smoothed TV value and
//! its majorization weights, the central-difference TV gradient, and the
//! isotropic TV proximal operator.

mod divergence;
mod neighbors;
mod prox;
mod smoothed;

pub use divergence::{central_tv_value, tv_divergence};
pub use neighbors::NeighborGraph;
pub use prox::{tv_prox, tv_prox_columns, tv_prox_objective, tv_prox_traced, TvProxReport};
pub use smoothed::{local_gradient_norms, tv_eps_value, tv_surrogate, tv_targets_z, tv_weights_p, TvSurrogate};

/// Smoothing and weight parameters of a TV penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvParams {
    pub eps_tv: f64,
    pub tau: f64,
}
