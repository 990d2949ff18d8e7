use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::init::{fill_zeros_average, init_factors, InitMethod};
use crate::matrix::{DenseMatrix, ProjectionBounds};
use crate::separated::{harden, ClusterLabels};
use crate::tv::{central_tv_value, tv_divergence, tv_eps_value, tv_surrogate, NeighborGraph};

/// Default TV smoothing of the multiplicative solvers, `sqrt(1e-5)`.
pub fn default_eps_tv() -> f64 {
    1e-5f64.sqrt()
}

/// Weights of the auxiliary-variable model
/// `½‖X−UV‖² + σ₁/2‖I−WᵀU‖² + σ₂/2‖W−U‖² + τ/2·TV_ε(U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mul1Params {
    pub sigma1: f64,
    pub sigma2: f64,
    pub tau: f64,
    pub eps_tv: f64,
    pub i_max: usize,
}

impl Default for Mul1Params {
    fn default() -> Self {
        Self {
            sigma1: 0.5,
            sigma2: 0.5,
            tau: 5e-3,
            eps_tv: default_eps_tv(),
            i_max: 800,
        }
    }
}

/// Weights of `½‖X−UV‖² + σ₁/4‖I−UᵀU‖² + τ·TV_ε(U)` with the
/// central-difference TV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mul2Params {
    pub sigma1: f64,
    pub tau: f64,
    pub eps_tv: f64,
    pub i_max: usize,
}

impl Default for Mul2Params {
    fn default() -> Self {
        Self {
            sigma1: 1.0,
            tau: 1e-3,
            eps_tv: default_eps_tv(),
            i_max: 700,
        }
    }
}

fn check_weights(weights: &[(&str, f64)], eps_tv: f64) -> Result<()> {
    for &(name, w) in weights {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {w}")));
        }
    }
    if !(eps_tv > 0.0 && eps_tv.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps_tv must be positive, got {eps_tv}")));
    }
    Ok(())
}

impl Mul1Params {
    pub fn validate(&self) -> Result<()> {
        check_weights(&[("sigma1", self.sigma1), ("sigma2", self.sigma2), ("tau", self.tau)], self.eps_tv)
    }
}

impl Mul2Params {
    pub fn validate(&self) -> Result<()> {
        check_weights(&[("sigma1", self.sigma1), ("tau", self.tau)], self.eps_tv)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mul1State {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub w: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mul2State {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

fn check_shapes(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, op: &'static str) -> Result<()> {
    if u.rows() != x.rows() || u.cols() != v.rows() {
        return Err(Error::dims(op, u.shape(), v.shape()));
    }
    if v.cols() != x.cols() {
        return Err(Error::dims(op, x.shape(), (u.rows(), v.cols())));
    }
    Ok(())
}

pub(crate) fn half_residual_sq(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix) -> f64 {
    let uv = u.matmul(v).expect("shapes checked");
    0.5 * x
        .as_slice()
        .iter()
        .zip(uv.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
}

/// `‖I − AᵀB‖²_F` for `M × K` matrices.
pub(crate) fn orthogonality_gap(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let g = a.matmul_tn(b).expect("shapes checked");
    let k = g.rows();
    (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (f64::from(u8::from(i == j)) - g.get(i, j)).powi(2))
        .sum()
}

pub fn mul1_cost(
    x: &DenseMatrix,
    u: &DenseMatrix,
    v: &DenseMatrix,
    w: &DenseMatrix,
    p: &Mul1Params,
    nb: &NeighborGraph,
) -> Result<f64> {
    check_shapes(x, u, v, "mul1_cost")?;
    if w.shape() != u.shape() {
        return Err(Error::dims("mul1_cost", w.shape(), u.shape()));
    }
    let coupling = w.sub(u)?.frobenius_sq();
    Ok(half_residual_sq(x, u, v)
        + 0.5 * p.sigma1 * orthogonality_gap(w, u)
        + 0.5 * p.sigma2 * coupling
        + 0.5 * p.tau * tv_eps_value(u, nb, p.eps_tv)?)
}

/// One sweep of the U, V, W multiplicative updates, each followed by the
/// strict-positivity clamp.
pub fn mul1_step(x: &DenseMatrix, s: &mut Mul1State, p: &Mul1Params, nb: &NeighborGraph) -> Result<()> {
    check_shapes(x, &s.u, &s.v, "mul1_step")?;
    let bounds = ProjectionBounds::default();
    let (s1, s2) = (p.sigma1, p.sigma2);

    let surrogate = tv_surrogate(&s.u, nb, p.eps_tv)?;
    let xvt = x.matmul_nt(&s.v)?;
    let uvvt = s.u.matmul(&s.v.matmul_nt(&s.v)?)?;
    let wwtu = s.w.matmul(&s.w.matmul_tn(&s.u)?)?;
    let (rows, cols) = s.u.shape();
    let mut num = DenseMatrix::zeros(rows, cols);
    let mut den = DenseMatrix::zeros(rows, cols);
    for m in 0..rows {
        for k in 0..cols {
            let pw = p.tau * surrogate.p.get(m, k);
            num.set(m, k, xvt.get(m, k) + pw * surrogate.z.get(m, k) + (s1 + s2) * s.w.get(m, k));
            den.set(
                m,
                k,
                pw * s.u.get(m, k) + s2 * s.u.get(m, k) + uvvt.get(m, k) + s1 * wwtu.get(m, k),
            );
        }
    }
    s.u.multiplicative_update(&num, &den, bounds);

    crate::separated::mu_v_step(x, &s.u, &mut s.v, bounds);

    let num = s.u.scale(s1 + s2);
    let den = s.u.matmul(&s.u.matmul_tn(&s.w)?)?.scale(s1).add_scaled(s2, &s.w)?;
    s.w.multiplicative_update(&num, &den, bounds);
    Ok(())
}

pub fn mul2_cost(x: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, p: &Mul2Params, grid: &GridGeometry) -> Result<f64> {
    check_shapes(x, u, v, "mul2_cost")?;
    Ok(half_residual_sq(x, u, v)
        + 0.25 * p.sigma1 * orthogonality_gap(u, u)
        + p.tau * central_tv_value(u, grid, p.eps_tv)?)
}

/// One U then V update. The U numerator may turn negative through the
/// divergence term; the clamp restores positivity.
pub fn mul2_step(x: &DenseMatrix, s: &mut Mul2State, p: &Mul2Params, grid: &GridGeometry) -> Result<()> {
    check_shapes(x, &s.u, &s.v, "mul2_step")?;
    let bounds = ProjectionBounds::default();
    let div = tv_divergence(&s.u, grid, p.eps_tv)?;
    let num = x
        .matmul_nt(&s.v)?
        .add_scaled(p.tau, &div)?
        .add_scaled(p.sigma1, &s.u)?;
    let den = s
        .u
        .matmul(&s.v.matmul_nt(&s.v)?)?
        .add_scaled(p.sigma1, &s.u.matmul(&s.u.matmul_tn(&s.u)?)?)?;
    s.u.multiplicative_update(&num, &den, bounds);
    crate::separated::mu_v_step(x, &s.u, &mut s.v, bounds);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MulSolver {
    Mul1(Mul1Params),
    Mul2(Mul2Params),
}

impl MulSolver {
    pub fn i_max(&self) -> usize {
        match self {
            Self::Mul1(p) => p.i_max,
            Self::Mul2(p) => p.i_max,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MulRun {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// Auxiliary variable, present for the first solver only.
    pub w: Option<DenseMatrix>,
    pub labels: ClusterLabels,
    /// `(iteration, cost)` at the start, every `stride` iterations and at
    /// the end.
    pub cost_trace: Vec<(usize, f64)>,
}

/// Strictly positive starting factors: zeros filled with `mean(X)/K`,
/// then clamped.
pub(crate) fn positive_start(x: &DenseMatrix, k: usize, init: InitMethod) -> Result<(DenseMatrix, DenseMatrix)> {
    let bounds = ProjectionBounds::default();
    let (mut u, mut v) = init_factors(x, k, init)?;
    fill_zeros_average(&mut u, &mut v, x);
    u.clamp_strict_positive_in_place(bounds);
    v.clamp_strict_positive_in_place(bounds);
    Ok((u, v))
}

/// Runs a multiplicative combined solver for its full iteration budget;
/// `W` starts at `U₀`.
pub fn run_mul(
    x: &DenseMatrix,
    k: usize,
    solver: MulSolver,
    init: InitMethod,
    grid: &GridGeometry,
    stride: usize,
) -> Result<MulRun> {
    if x.rows() != grid.len() {
        return Err(Error::dims("run_mul", x.shape(), (grid.len(), x.cols())));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("cost stride must be at least 1".into()));
    }
    let (u, v) = positive_start(x, k, init)?;
    let i_max = solver.i_max();
    let mut trace = Vec::new();
    let record = |i: usize| i % stride == 0 || i == i_max;
    let (u, v, w) = match solver {
        MulSolver::Mul1(p) => {
            p.validate()?;
            let nb = NeighborGraph::build(grid);
            let mut s = Mul1State { w: u.clone(), u, v };
            trace.push((0, mul1_cost(x, &s.u, &s.v, &s.w, &p, &nb)?));
            for i in 1..=i_max {
                mul1_step(x, &mut s, &p, &nb)?;
                if record(i) {
                    trace.push((i, mul1_cost(x, &s.u, &s.v, &s.w, &p, &nb)?));
                }
            }
            (s.u, s.v, Some(s.w))
        }
        MulSolver::Mul2(p) => {
            p.validate()?;
            let mut s = Mul2State { u, v };
            trace.push((0, mul2_cost(x, &s.u, &s.v, &p, grid)?));
            for i in 1..=i_max {
                mul2_step(x, &mut s, &p, grid)?;
                if record(i) {
                    trace.push((i, mul2_cost(x, &s.u, &s.v, &p, grid)?));
                }
            }
            (s.u, s.v, None)
        }
    };
    let labels = harden(&u, init.seed);
    Ok(MulRun {
        u,
        v,
        w,
        labels,
        cost_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::InitKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, lo: f64, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..1.0))
    }

    #[test]
    fn cost_of_exact_orthogonal_constant_factorization() {
        // Columns are constant on the grid, orthonormal, and X = UV.
        let g = GridGeometry::full(2, 2).unwrap();
        let nb = NeighborGraph::build(&g);
        let u = DenseMatrix::from_fn(4, 1, |_, _| 0.5);
        let v = random(1, 3, 0.0, 1);
        let x = u.matmul(&v).unwrap();
        let p = Mul1Params::default();
        let c = mul1_cost(&x, &u, &v, &u, &p, &nb).unwrap();
        assert!((c - 0.5 * p.tau * 4.0 * p.eps_tv).abs() < 1e-15);
    }

    #[test]
    fn cost_with_zero_membership() {
        let g = GridGeometry::full(3, 2).unwrap();
        let nb = NeighborGraph::build(&g);
        let x = random(6, 4, 0.0, 2);
        let z = DenseMatrix::zeros(6, 3);
        let v = random(3, 4, 0.0, 3);
        let p = Mul1Params::default();
        let expect = 0.5 * x.frobenius_sq() + 0.5 * p.sigma1 * 3.0 + 0.5 * p.tau * 18.0 * p.eps_tv;
        assert!((mul1_cost(&x, &z, &v, &z, &p, &nb).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn cost_matches_four_term_oracle() {
        let g = GridGeometry::full(3, 3).unwrap();
        let nb = NeighborGraph::build(&g);
        let (x, u, v, w) = (random(9, 5, 0.0, 4), random(9, 2, 0.0, 5), random(2, 5, 0.0, 6), random(9, 2, 0.0, 7));
        let p = Mul1Params { sigma1: 0.3, sigma2: 0.7, tau: 0.2, eps_tv: 0.1, i_max: 1 };
        let mut fit = 0.0;
        for i in 0..9 {
            for j in 0..5 {
                let r: f64 = (0..2).map(|k| u.get(i, k) * v.get(k, j)).sum();
                fit += (x.get(i, j) - r).powi(2);
            }
        }
        let mut orth = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let g: f64 = (0..9).map(|i| w.get(i, a) * u.get(i, b)).sum();
                orth += (f64::from(u8::from(a == b)) - g).powi(2);
            }
        }
        let coup: f64 = w.as_slice().iter().zip(u.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
        let mut tv = 0.0;
        for k in 0..2 {
            for i in 0..3 {
                for j in 0..3 {
                    let c = u.get(3 * i + j, k);
                    let mut s = 0.01;
                    if i + 1 < 3 {
                        s += (c - u.get(3 * (i + 1) + j, k)).powi(2);
                    }
                    if j + 1 < 3 {
                        s += (c - u.get(3 * i + j + 1, k)).powi(2);
                    }
                    tv += s.sqrt();
                }
            }
        }
        let expect = 0.5 * fit + 0.15 * orth + 0.35 * coup + 0.1 * tv;
        assert!((mul1_cost(&x, &u, &v, &w, &p, &nb).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn mul1_trace_is_monotone() {
        let g = GridGeometry::full(5, 4).unwrap();
        let x = random(20, 15, 0.0, 8);
        let run = run_mul(&x, 3, MulSolver::Mul1(Mul1Params { i_max: 200, ..Default::default() }), InitMethod::new(InitKind::Svd, 0), &g, 1).unwrap();
        assert_eq!(run.cost_trace.len(), 201);
        for w in run.cost_trace.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-10 * (1.0 + w[0].1.abs()), "{:?}", w);
        }
    }

    #[test]
    fn mul1_reduces_to_lee_seung_without_penalties() {
        let g = GridGeometry::full(4, 3).unwrap();
        let nb = NeighborGraph::build(&g);
        let x = random(12, 6, 0.0, 9);
        let (u, v) = (random(12, 2, 0.1, 10), random(2, 6, 0.1, 11));
        let p = Mul1Params { sigma1: 0.0, sigma2: 0.0, tau: 0.0, eps_tv: 0.1, i_max: 1 };
        let mut s = Mul1State { u: u.clone(), v: v.clone(), w: u.clone() };
        mul1_step(&x, &mut s, &p, &nb).unwrap();
        let num = x.matmul_nt(&v).unwrap();
        let den = u.matmul(&v.matmul_nt(&v).unwrap()).unwrap();
        for i in 0..12 {
            for k in 0..2 {
                let expect = u.get(i, k) * num.get(i, k) / den.get(i, k);
                assert!((s.u.get(i, k) - expect).abs() <= 1e-14 * expect);
            }
        }
    }

    #[test]
    fn mul1_without_tv_is_orthogonal_mu_rule() {
        let g = GridGeometry::full(4, 3).unwrap();
        let nb = NeighborGraph::build(&g);
        let x = random(12, 6, 0.0, 12);
        let (u, v, w) = (random(12, 2, 0.1, 13), random(2, 6, 0.1, 14), random(12, 2, 0.1, 15));
        let p = Mul1Params { sigma1: 0.4, sigma2: 0.6, tau: 0.0, eps_tv: 0.1, i_max: 1 };
        let mut s = Mul1State { u: u.clone(), v, w: w.clone() };
        let vv = s.v.clone();
        mul1_step(&x, &mut s, &p, &nb).unwrap();
        let xvt = x.matmul_nt(&vv).unwrap();
        let uvvt = u.matmul(&vv.matmul_nt(&vv).unwrap()).unwrap();
        let wwtu = w.matmul(&w.matmul_tn(&u).unwrap()).unwrap();
        for i in 0..12 {
            for k in 0..2 {
                let num = xvt.get(i, k) + w.get(i, k);
                let den = 0.6 * u.get(i, k) + uvvt.get(i, k) + 0.4 * wwtu.get(i, k);
                let expect = u.get(i, k) * num / den;
                assert!((s.u.get(i, k) - expect).abs() <= 1e-14 * expect);
            }
        }
    }

    #[test]
    fn mul2_fixed_point_without_penalties() {
        let g = GridGeometry::full(3, 3).unwrap();
        let (u, v) = (random(9, 2, 0.1, 16), random(2, 4, 0.1, 17));
        let x = u.matmul(&v).unwrap();
        let p = Mul2Params { sigma1: 0.0, tau: 0.0, eps_tv: 0.1, i_max: 1 };
        let mut s = Mul2State { u: u.clone(), v: v.clone() };
        mul2_step(&x, &mut s, &p, &g).unwrap();
        assert!(s.u.sub(&u).unwrap().frobenius_norm() < 1e-12);
        assert!(s.v.sub(&v).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn mul2_discrepancy_decreases() {
        let g = GridGeometry::full(5, 4).unwrap();
        let x = random(20, 15, 0.0, 18);
        let init = InitMethod::new(InitKind::Svd, 0);
        let (u, v) = positive_start(&x, 3, init).unwrap();
        let before = half_residual_sq(&x, &u, &v);
        let run = run_mul(&x, 3, MulSolver::Mul2(Mul2Params { i_max: 50, ..Default::default() }), init, &g, 1).unwrap();
        assert!(half_residual_sq(&x, &run.u, &run.v) < before);
    }

    #[test]
    fn factors_stay_within_bounds() {
        let g = GridGeometry::full(4, 4).unwrap();
        let x = random(16, 6, 0.0, 19);
        let b = ProjectionBounds::default();
        for solver in [
            MulSolver::Mul1(Mul1Params { i_max: 30, ..Default::default() }),
            MulSolver::Mul2(Mul2Params { i_max: 30, ..Default::default() }),
        ] {
            let r = run_mul(&x, 3, solver, InitMethod::new(InitKind::KMeansPlusPlus, 2), &g, 10).unwrap();
            assert!(r.u.min_value() >= b.lower && r.v.min_value() >= b.lower);
            assert!(r.u.max_value() <= b.upper && r.v.max_value() <= b.upper);
            assert_eq!(r.cost_trace.iter().map(|t| t.0).collect::<Vec<_>>(), vec![0, 10, 20, 30]);
        }
    }
}
