use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spectral::{lambda_max, EigenMethod};
use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::init::{init_factors, InitMethod};
use crate::matrix::DenseMatrix;
use crate::separated::{harden, ClusterLabels};
use crate::tv::{tv_eps_value, tv_prox_columns, NeighborGraph};

/// Momentum used by the inertial variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inertia {
    /// `β_i = (i − 1)/(i + 2)` at iteration `i = 1, 2, …`.
    Schedule,
    Fixed(f64),
}

impl Inertia {
    fn at(self, i: usize) -> f64 {
        match self {
            Self::Schedule => (i as f64 - 1.0) / (i as f64 + 2.0),
            Self::Fixed(b) => b,
        }
    }
}

/// Parameters shared by the PALM-family solvers for
/// `½‖X−UV‖² + σ₁/2‖I−WᵀU‖² + σ₂/2‖W−U‖² + τ‖U‖_TV` over nonnegative factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PalmParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub tau: f64,
    pub i_max: usize,
    /// Step sizes are `step_scale / L`.
    pub step_scale: f64,
    pub inertia: Inertia,
    /// Mini-batches per outer iteration of the stochastic variant.
    pub subsamples: usize,
    pub power_iters: usize,
    pub prox_iters: usize,
    /// Upper bound on the effective TV weight `τη` of the stochastic variant.
    pub tau_eta_cap: f64,
    /// Seeds power-iteration starts and batch shuffling.
    pub seed: u64,
}

impl PalmParams {
    pub fn palm() -> Self {
        Self {
            sigma1: 0.1,
            sigma2: 0.1,
            tau: 0.1,
            i_max: 400,
            step_scale: 1.0,
            inertia: Inertia::Fixed(0.0),
            subsamples: 1,
            power_iters: 5,
            prox_iters: 5,
            tau_eta_cap: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn ipalm() -> Self {
        Self {
            i_max: 300,
            step_scale: 0.9,
            inertia: Inertia::Schedule,
            ..Self::palm()
        }
    }

    pub fn spring() -> Self {
        Self {
            tau: 1e-4,
            i_max: 100,
            subsamples: 40,
            tau_eta_cap: 1e-3,
            ..Self::palm()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("sigma1", self.sigma1), ("sigma2", self.sigma2), ("tau", self.tau)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {w}")));
            }
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("step_scale must be positive, got {}", self.step_scale)));
        }
        if let Inertia::Fixed(b) = self.inertia {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidArgument(format!("inertia must lie in [0, 1), got {b}")));
            }
        }
        if self.subsamples == 0 || self.power_iters == 0 || self.prox_iters == 0 {
            return Err(Error::InvalidArgument(
                "subsamples, power_iters and prox_iters must be at least 1".into(),
            ));
        }
        if !(self.tau_eta_cap > 0.0) {
            return Err(Error::InvalidArgument(format!("tau_eta_cap must be positive, got {}", self.tau_eta_cap)));
        }
        Ok(())
    }
}

/// Sorted, duplicate-free subset of column or row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniBatch {
    indices: Vec<usize>,
}

impl MiniBatch {
    /// Indices must be unique and below `bound`; they are stored sorted.
    pub fn new(mut indices: Vec<usize>, bound: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyBatch);
        }
        indices.sort_unstable();
        if let Some(&last) = indices.last() {
            if last >= bound {
                return Err(Error::InvalidArgument(format!("batch index {last} not below {bound}")));
            }
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("batch indices must be unique".into()));
        }
        Ok(Self { indices })
    }

    pub fn full(bound: usize) -> Result<Self> {
        Self::new((0..bound).collect(), bound)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorState {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub w: DenseMatrix,
}

fn check_uvw(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, w: &DenseMatrix, op: &'static str) -> Result<()> {
    if u.rows() != x.rows() || u.cols() != v.rows() {
        return Err(Error::dims(op, u.shape(), v.shape()));
    }
    if v.cols() != x.cols() {
        return Err(Error::dims(op, x.shape(), (u.rows(), v.cols())));
    }
    if w.shape() != u.shape() {
        return Err(Error::dims(op, w.shape(), u.shape()));
    }
    Ok(())
}

/// `σ₁(WWᵀU − W) + σ₂(U − W)`.
fn penalty_grad_u(u: &DenseMatrix, w: &DenseMatrix, s1: f64, s2: f64) -> Result<DenseMatrix> {
    let wwtu = w.matmul(&w.matmul_tn(u)?)?;
    wwtu.sub(w)?.scale(s1).add_scaled(s2, &u.sub(w)?)
}

/// `U(V_B V_Bᵀ) − X_B V_Bᵀ` for column-restricted `x`, `v`.
fn data_grad_u(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    u.matmul(&v.matmul_nt(v)?)?.sub(&x.matmul_nt(v)?)
}

/// `(U_BᵀU_B)V − U_BᵀX_B` for row-restricted `x`, `u`.
fn data_grad_v(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    u.matmul_tn(u)?.matmul(v)?.sub(&u.matmul_tn(x)?)
}

pub fn grad_u(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, w: &DenseMatrix, sigma1: f64, sigma2: f64) -> Result<DenseMatrix> {
    check_uvw(x, u, v, w, "grad_u")?;
    data_grad_u(x, u, v)?.add_scaled(1.0, &penalty_grad_u(u, w, sigma1, sigma2)?)
}

pub fn grad_v(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    check_uvw(x, u, v, u, "grad_v")?;
    data_grad_v(x, u, v)
}

pub fn grad_w(u: &DenseMatrix, w: &DenseMatrix, sigma1: f64, sigma2: f64) -> Result<DenseMatrix> {
    if w.shape() != u.shape() {
        return Err(Error::dims("grad_w", w.shape(), u.shape()));
    }
    let uutw = u.matmul(&u.matmul_tn(w)?)?;
    uutw.sub(u)?.scale(sigma1).add_scaled(sigma2, &w.sub(u)?)
}

/// Mini-batch estimate over the columns in `batch`:
/// `U V_B V_Bᵀ − X_B V_Bᵀ + (|B|/N)(σ₁(WWᵀU − W) + σ₂(U − W))`.
pub fn sgd_grad_u(
    x: &DenseMatrix,
    u: &DenseMatrix,
    v: &DenseMatrix,
    w: &DenseMatrix,
    batch: &MiniBatch,
    sigma1: f64,
    sigma2: f64,
) -> Result<DenseMatrix> {
    check_uvw(x, u, v, w, "sgd_grad_u")?;
    check_batch(batch, x.cols())?;
    let (xb, vb) = (x.select_columns(batch.indices()), v.select_columns(batch.indices()));
    let ratio = batch.len() as f64 / x.cols() as f64;
    data_grad_u(&xb, u, &vb)?.add_scaled(ratio, &penalty_grad_u(u, w, sigma1, sigma2)?)
}

/// Mini-batch estimate over the rows in `batch`: `U_BᵀU_B V − U_BᵀX_B`.
pub fn sgd_grad_v(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, batch: &MiniBatch) -> Result<DenseMatrix> {
    check_uvw(x, u, v, u, "sgd_grad_v")?;
    check_batch(batch, x.rows())?;
    data_grad_v(&x.select_rows(batch.indices()), &u.select_rows(batch.indices()), v)
}

fn check_batch(batch: &MiniBatch, bound: usize) -> Result<()> {
    match batch.indices().last() {
        Some(&l) if l < bound => Ok(()),
        Some(&l) => Err(Error::InvalidArgument(format!("batch index {l} not below {bound}"))),
        None => Err(Error::EmptyBatch),
    }
}

/// Smooth part `½‖X−UV‖² + σ₁/2‖I−WᵀU‖² + σ₂/2‖W−U‖²`.
pub fn smooth_objective(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, w: &DenseMatrix, sigma1: f64, sigma2: f64) -> Result<f64> {
    check_uvw(x, u, v, w, "smooth_objective")?;
    Ok(super::mul::half_residual_sq(x, u, v)
        + 0.5 * sigma1 * super::mul::orthogonality_gap(w, u)
        + 0.5 * sigma2 * w.sub(u)?.frobenius_sq())
}

/// Smooth part plus `τ` times the isotropic (unsmoothed) TV of `U`.
pub fn palm_objective(
    x: &DenseMatrix,
    s: &FactorState,
    sigma1: f64,
    sigma2: f64,
    tau: f64,
    nb: &NeighborGraph,
) -> Result<f64> {
    Ok(smooth_objective(x, &s.u, &s.v, &s.w, sigma1, sigma2)? + tau * tv_eps_value(&s.u, nb, 0.0)?)
}

/// `L_U = λmax(V Vᵀ) + ratio·λmax(σ₁WWᵀ + σ₂I)`; `ratio` is `|B|/N` for
/// mini-batches and 1 otherwise. `v` may be column-restricted.
pub fn lipschitz_u(
    v: &DenseMatrix,
    w: &DenseMatrix,
    sigma1: f64,
    sigma2: f64,
    ratio: f64,
    method: EigenMethod,
    rng: &mut impl Rng,
) -> Result<f64> {
    let data = lambda_max(&v.matmul_nt(v)?, method, rng)?;
    // WWᵀ and WᵀW share their nonzero spectrum; the K×K side is cheaper.
    let penalty = sigma1 * lambda_max(&w.matmul_tn(w)?, method, rng)? + sigma2;
    Ok(data + ratio * penalty)
}

/// `L_V = λmax(UᵀU)`; `u` may be row-restricted.
pub fn lipschitz_v(u: &DenseMatrix, method: EigenMethod, rng: &mut impl Rng) -> Result<f64> {
    lambda_max(&u.matmul_tn(u)?, method, rng)
}

/// `L_W = λmax(σ₁UUᵀ + σ₂I)`.
pub fn lipschitz_w(u: &DenseMatrix, sigma1: f64, sigma2: f64, method: EigenMethod, rng: &mut impl Rng) -> Result<f64> {
    Ok(sigma1 * lambda_max(&u.matmul_tn(u)?, method, rng)? + sigma2)
}

/// Step size of the stochastic variant at outer iteration `i`:
/// `min{1/(sqrt(⌈i·|B|/n⌉)·L), 1/L}`.
pub fn spring_step(i: usize, batch_len: usize, n: usize, lipschitz: f64) -> f64 {
    let count = ((i * batch_len) as f64 / n as f64).ceil();
    let base = 1.0 / lipschitz;
    if count <= 1.0 { base } else { base.min(1.0 / (count.sqrt() * lipschitz)) }
}

#[derive(Debug, Clone)]
pub struct PalmRun {
    pub state: FactorState,
    pub labels: ClusterLabels,
    /// Full objective at the start and after every outer iteration.
    pub trace: Vec<f64>,
}

fn validate_run(x: &DenseMatrix, grid: &GridGeometry, p: &PalmParams) -> Result<()> {
    p.validate()?;
    if x.rows() != grid.len() {
        return Err(Error::dims("palm", x.shape(), (grid.len(), x.cols())));
    }
    Ok(())
}

/// Nonnegative starting point with `W₀ = U₀`.
fn start(x: &DenseMatrix, k: usize, init: InitMethod) -> Result<FactorState> {
    let (u, v) = init_factors(x, k, init)?;
    Ok(FactorState { w: u.clone(), u, v })
}

/// `[prox_{weight·TV}(point − η·grad)]₊`, column by column.
fn prox_u(point: &DenseMatrix, grad: &DenseMatrix, eta: f64, weight: f64, grid: &GridGeometry, iters: usize) -> Result<DenseMatrix> {
    let moved = point.add_scaled(-eta, grad)?;
    if weight > 0.0 {
        Ok(tv_prox_columns(&moved, weight, grid, iters)?.project_nonnegative())
    } else {
        Ok(moved.project_nonnegative())
    }
}

fn extrapolate(current: &DenseMatrix, previous: &DenseMatrix, beta: f64) -> DenseMatrix {
    if beta == 0.0 {
        return current.clone();
    }
    current.scale(1.0 + beta).add_scaled(-beta, previous).expect("same shape")
}

/// One inertial sweep over U, V, W; with `beta = 0` it is a plain PALM
/// sweep.
fn inertial_sweep(
    x: &DenseMatrix,
    s: &mut FactorState,
    prev: &mut FactorState,
    beta: f64,
    p: &PalmParams,
    grid: &GridGeometry,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let method = EigenMethod::Power(p.power_iters);
    let (s1, s2) = (p.sigma1, p.sigma2);

    let eta_u = p.step_scale / lipschitz_u(&s.v, &s.w, s1, s2, 1.0, method, rng)?;
    let y = extrapolate(&s.u, &prev.u, beta);
    let g = grad_u(x, &y, &s.v, &s.w, s1, s2)?;
    let u_next = prox_u(&y, &g, eta_u, p.tau * eta_u, grid, p.prox_iters)?;
    prev.u = std::mem::replace(&mut s.u, u_next);

    let eta_v = p.step_scale / lipschitz_v(&s.u, method, rng)?;
    let y = extrapolate(&s.v, &prev.v, beta);
    let g = grad_v(x, &s.u, &y)?;
    let v_next = y.add_scaled(-eta_v, &g)?.project_nonnegative();
    prev.v = std::mem::replace(&mut s.v, v_next);

    let eta_w = p.step_scale / lipschitz_w(&s.u, s1, s2, method, rng)?;
    let y = extrapolate(&s.w, &prev.w, beta);
    let g = grad_w(&s.u, &y, s1, s2)?;
    let w_next = y.add_scaled(-eta_w, &g)?.project_nonnegative();
    prev.w = std::mem::replace(&mut s.w, w_next);
    Ok(())
}

fn finish(x: &DenseMatrix, state: FactorState, trace: Vec<f64>, seed: u64) -> PalmRun {
    debug_assert_eq!(state.u.rows(), x.rows());
    let labels = harden(&state.u, seed);
    PalmRun { state, labels, trace }
}

fn run_inertial(x: &DenseMatrix, k: usize, p: &PalmParams, init: InitMethod, grid: &GridGeometry) -> Result<PalmRun> {
    validate_run(x, grid, p)?;
    let nb = NeighborGraph::build(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut s = start(x, k, init)?;
    let mut prev = s.clone();
    let mut trace = vec![palm_objective(x, &s, p.sigma1, p.sigma2, p.tau, &nb)?];
    for i in 1..=p.i_max {
        inertial_sweep(x, &mut s, &mut prev, p.inertia.at(i), p, grid, &mut rng)?;
        trace.push(palm_objective(x, &s, p.sigma1, p.sigma2, p.tau, &nb)?);
    }
    Ok(finish(x, s, trace, init.seed))
}

/// Proximal alternating linearized minimization with `η = step_scale/L`
/// and no momentum; `p.inertia` is ignored.
pub fn palm_run(x: &DenseMatrix, k: usize, p: &PalmParams, init: InitMethod, grid: &GridGeometry) -> Result<PalmRun> {
    let p = PalmParams { inertia: Inertia::Fixed(0.0), ..*p };
    run_inertial(x, k, &p, init, grid)
}

/// Inertial variant: every block's gradient step starts from
/// `(1 + β)·current − β·previous`.
pub fn ipalm_run(x: &DenseMatrix, k: usize, p: &PalmParams, init: InitMethod, grid: &GridGeometry) -> Result<PalmRun> {
    run_inertial(x, k, p, init, grid)
}

/// Splits a seeded permutation of `0..n` into `parts` near-equal
/// contiguous batches.
fn shuffled_batches(n: usize, parts: usize, rng: &mut ChaCha8Rng) -> Result<Vec<MiniBatch>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let (base, extra) = (n / parts, n % parts);
    let mut out = Vec::with_capacity(parts);
    let mut offset = 0;
    for j in 0..parts {
        let len = base + usize::from(j < extra);
        out.push(MiniBatch::new(perm[offset..offset + len].to_vec(), n)?);
        offset += len;
    }
    Ok(out)
}

/// One stochastic inner step with the given batches at outer iteration `i`.
#[allow(clippy::too_many_arguments)]
fn spring_inner(
    x: &DenseMatrix,
    s: &mut FactorState,
    bu: &MiniBatch,
    bv: &MiniBatch,
    i: usize,
    p: &PalmParams,
    grid: &GridGeometry,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let method = EigenMethod::Power(p.power_iters);
    let (m, n) = x.shape();
    let (s1, s2) = (p.sigma1, p.sigma2);

    let vb = s.v.select_columns(bu.indices());
    let ratio = bu.len() as f64 / n as f64;
    let eta_u = p.step_scale * spring_step(i, bu.len(), n, lipschitz_u(&vb, &s.w, s1, s2, ratio, method, rng)?);
    let g = sgd_grad_u(x, &s.u, &s.v, &s.w, bu, s1, s2)?;
    let weight = (p.tau * eta_u).min(p.tau_eta_cap);
    s.u = prox_u(&s.u, &g, eta_u, weight, grid, p.prox_iters)?;

    let ub = s.u.select_rows(bv.indices());
    let eta_v = p.step_scale * spring_step(i, bv.len(), m, lipschitz_v(&ub, method, rng)?);
    let g = sgd_grad_v(x, &s.u, &s.v, bv)?;
    s.v = s.v.add_scaled(-eta_v, &g)?.project_nonnegative();

    let eta_w = p.step_scale / lipschitz_w(&s.u, s1, s2, method, rng)?;
    let g = grad_w(&s.u, &s.w, s1, s2)?;
    s.w = s.w.add_scaled(-eta_w, &g)?.project_nonnegative();
    Ok(())
}

/// Stochastic proximal alternating minimization with SGD estimates: each
/// outer iteration reshuffles columns and rows into `subsamples` batches
/// and runs one inner step per batch pair. `W` always uses the full
/// gradient.
pub fn spring_run(x: &DenseMatrix, k: usize, p: &PalmParams, init: InitMethod, grid: &GridGeometry) -> Result<PalmRun> {
    validate_run(x, grid, p)?;
    let (m, n) = x.shape();
    if p.subsamples > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "{} subsamples exceed min(M, N) = {}",
            p.subsamples,
            m.min(n)
        )));
    }
    let nb = NeighborGraph::build(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    // Separate stream so power-iteration starts match the full-gradient
    // solvers step for step.
    let mut batch_rng = ChaCha8Rng::seed_from_u64(p.seed);
    batch_rng.set_stream(1);
    let mut s = start(x, k, init)?;
    let mut trace = vec![palm_objective(x, &s, p.sigma1, p.sigma2, p.tau, &nb)?];
    for i in 0..p.i_max {
        let cols = shuffled_batches(n, p.subsamples, &mut batch_rng)?;
        let rows = shuffled_batches(m, p.subsamples, &mut batch_rng)?;
        for (bu, bv) in cols.iter().zip(&rows) {
            spring_inner(x, &mut s, bu, bv, i, p, grid, &mut rng)?;
        }
        trace.push(palm_objective(x, &s, p.sigma1, p.sigma2, p.tau, &nb)?);
    }
    Ok(finish(x, s, trace, init.seed))
}
