use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::matrix::DenseMatrix;

/// Forward-difference operator `D` restricted to annotated pixels: each row
/// has an optional neighbour below and to the right.
struct GraphGradient {
    down: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
}

impl GraphGradient {
    fn new(grid: &GridGeometry) -> Self {
        let n = grid.len();
        let (mut down, mut right) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for m in 0..n {
            let (i, j) = grid.pixel_of_row(m);
            down.push(grid.row_of_pixel(i + 1, j));
            right.push(grid.row_of_pixel(i, j + 1));
        }
        Self { down, right }
    }

    fn apply(&self, y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        for m in 0..y.len() {
            gx[m] = self.down[m].map_or(0.0, |d| y[d] - y[m]);
            gy[m] = self.right[m].map_or(0.0, |r| y[r] - y[m]);
        }
    }

    fn apply_adjoint(&self, px: &[f64], py: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for m in 0..out.len() {
            if let Some(d) = self.down[m] {
                out[m] -= px[m];
                out[d] += px[m];
            }
            if let Some(r) = self.right[m] {
                out[m] -= py[m];
                out[r] += py[m];
            }
        }
    }

    fn tv(&self, y: &[f64]) -> f64 {
        (0..y.len())
            .map(|m| {
                let gx = self.down[m].map_or(0.0, |d| y[d] - y[m]);
                let gy = self.right[m].map_or(0.0, |r| y[r] - y[m]);
                gx.hypot(gy)
            })
            .sum()
    }
}

fn objective(op: &GraphGradient, y: &[f64], x: &[f64], tau: f64) -> f64 {
    let fit: f64 = y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
    0.5 * fit + tau * op.tv(y)
}

/// `½‖y − x‖² + τ‖y‖_TV` with the isotropic, unsmoothed TV on the grid.
pub fn tv_prox_objective(y: &[f64], x: &[f64], tau: f64, grid: &GridGeometry) -> f64 {
    objective(&GraphGradient::new(grid), y, x, tau)
}

/// Result of a traced prox solve.
#[derive(Debug, Clone)]
pub struct TvProxReport {
    pub solution: Vec<f64>,
    /// Primal objective of the returned iterate after each outer iteration;
    /// entry 0 is the objective at the input.
    pub objectives: Vec<f64>,
}

fn validate(x: &[f64], tau: f64, grid: &GridGeometry, max_iter: usize) -> Result<()> {
    if x.len() != grid.len() {
        return Err(Error::dims("tv_prox", (x.len(), 1), (grid.len(), 1)));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    Ok(())
}

/// Proximal map of `τ‖·‖_TV` evaluated by fast gradient projection on the
/// dual problem (step `1/(8τ)`, Nesterov momentum with adaptive restart).
/// The best primal iterate
/// seen so far is returned, so the objective never exceeds its value at `x`.
pub fn tv_prox_traced(x: &[f64], tau: f64, grid: &GridGeometry, max_iter: usize) -> Result<TvProxReport> {
    validate(x, tau, grid, max_iter)?;
    let op = GraphGradient::new(grid);
    let start = objective(&op, x, x, tau);
    if tau == 0.0 {
        return Ok(TvProxReport {
            solution: x.to_vec(),
            objectives: vec![start; max_iter + 1],
        });
    }
    let n = x.len();
    let step = 1.0 / (8.0 * tau);
    let (mut px, mut py) = (vec![0.0; n], vec![0.0; n]);
    let (mut rx, mut ry) = (vec![0.0; n], vec![0.0; n]);
    let (mut gx, mut gy) = (vec![0.0; n], vec![0.0; n]);
    let (mut qxs, mut qys) = (vec![0.0; n], vec![0.0; n]);
    let mut adj = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut best = x.to_vec();
    let mut best_obj = start;
    let mut objectives = Vec::with_capacity(max_iter + 1);
    objectives.push(start);
    let mut t = 1.0f64;

    for _ in 0..max_iter {
        op.apply_adjoint(&rx, &ry, &mut adj);
        for m in 0..n {
            y[m] = x[m] - tau * adj[m];
        }
        op.apply(&y, &mut gx, &mut gy);
        let mut alignment = 0.0;
        for m in 0..n {
            let qx = rx[m] + step * gx[m];
            let qy = ry[m] + step * gy[m];
            let scale = 1.0 / qx.hypot(qy).max(1.0);
            let (nx, ny) = (qx * scale, qy * scale);
            alignment += (rx[m] - nx) * (nx - px[m]) + (ry[m] - ny) * (ny - py[m]);
            qxs[m] = nx;
            qys[m] = ny;
        }
        // Gradient restart: drop the momentum once it points uphill.
        let momentum = if alignment > 0.0 {
            t = 1.0;
            0.0
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let b = (t - 1.0) / t_next;
            t = t_next;
            b
        };
        for m in 0..n {
            rx[m] = qxs[m] + momentum * (qxs[m] - px[m]);
            ry[m] = qys[m] + momentum * (qys[m] - py[m]);
        }
        px.copy_from_slice(&qxs);
        py.copy_from_slice(&qys);

        op.apply_adjoint(&px, &py, &mut adj);
        for m in 0..n {
            y[m] = x[m] - tau * adj[m];
        }
        let obj = objective(&op, &y, x, tau);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&y);
        }
        objectives.push(best_obj);
    }
    Ok(TvProxReport {
        solution: best,
        objectives,
    })
}

/// `argmin_y ½‖y − x‖² + τ‖y‖_TV` for one image given as a column over the
/// annotated pixels.
pub fn tv_prox(x: &[f64], tau: f64, grid: &GridGeometry, max_iter: usize) -> Result<Vec<f64>> {
    Ok(tv_prox_traced(x, tau, grid, max_iter)?.solution)
}

/// Applies [`tv_prox`] to every column of `u` independently.
pub fn tv_prox_columns(u: &DenseMatrix, tau: f64, grid: &GridGeometry, max_iter: usize) -> Result<DenseMatrix> {
    if u.rows() != grid.len() {
        return Err(Error::dims("tv_prox_columns", u.shape(), (grid.len(), u.cols())));
    }
    let mut out = u.clone();
    for k in 0..u.cols() {
        let col = tv_prox(&u.column(k), tau, grid, max_iter)?;
        out.set_column(k, &col);
    }
    Ok(out)
}
