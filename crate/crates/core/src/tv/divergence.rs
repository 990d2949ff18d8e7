use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::matrix::DenseMatrix;

/// Value of column `k` at offset `(di, dj)` from the pixel of row `m`.
///
/// Cells outside the grid or mask fall back to replicate padding: first the
/// cell in the centre row, then the one in the centre column, then the
/// centre itself.
fn sample(u: &DenseMatrix, grid: &GridGeometry, k: usize, i: usize, j: usize, di: isize, dj: isize) -> f64 {
    let (i, j) = (i as isize, j as isize);
    let row = grid
        .row_at(i + di, j + dj)
        .or_else(|| grid.row_at(i, j + dj))
        .or_else(|| grid.row_at(i + di, j))
        .or_else(|| grid.row_at(i, j))
        .expect("centre pixel is annotated");
    u.get(row, k)
}

struct Stencil {
    dx: f64,
    dy: f64,
    dxx: f64,
    dyy: f64,
    dxy: f64,
}

fn stencil(u: &DenseMatrix, grid: &GridGeometry, m: usize, k: usize) -> Stencil {
    let (i, j) = grid.pixel_of_row(m);
    let at = |di, dj| sample(u, grid, k, i, j, di, dj);
    let c = u.get(m, k);
    let (n, s, w, e) = (at(-1, 0), at(1, 0), at(0, -1), at(0, 1));
    Stencil {
        dx: 0.5 * (s - n),
        dy: 0.5 * (e - w),
        dxx: s - 2.0 * c + n,
        dyy: e - 2.0 * c + w,
        dxy: 0.25 * (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)),
    }
}

fn check(u: &DenseMatrix, grid: &GridGeometry, eps_tv: f64) -> Result<()> {
    if u.rows() != grid.len() {
        return Err(Error::dims("tv_divergence", u.shape(), (grid.len(), u.cols())));
    }
    if !(eps_tv > 0.0) {
        return Err(Error::InvalidArgument(format!("eps_tv must be positive, got {eps_tv}")));
    }
    Ok(())
}

/// Central-difference discretization of `div(∇u / ‖∇u‖_ε)` applied to each
/// column of `u` reshaped onto the grid. `x` is the vertical axis, `y` the
/// horizontal one.
pub fn tv_divergence(u: &DenseMatrix, grid: &GridGeometry, eps_tv: f64) -> Result<DenseMatrix> {
    check(u, grid, eps_tv)?;
    let eps2 = eps_tv * eps_tv;
    Ok(DenseMatrix::from_fn(u.rows(), u.cols(), |m, k| {
        let s = stencil(u, grid, m, k);
        let num = eps2 * (s.dxx + s.dyy) + s.dx * s.dx * s.dyy + s.dy * s.dy * s.dxx
            - 2.0 * s.dx * s.dy * s.dxy;
        let norm2 = s.dx * s.dx + s.dy * s.dy + eps2;
        num / (norm2 * norm2.sqrt())
    }))
}

/// `Σ_k Σ_m sqrt(eps² + (Δx u)² + (Δy u)²)` with the same central
/// differences; the TV term monitored for the continuous-TV solver.
pub fn central_tv_value(u: &DenseMatrix, grid: &GridGeometry, eps_tv: f64) -> Result<f64> {
    check(u, grid, eps_tv)?;
    let eps2 = eps_tv * eps_tv;
    let mut total = 0.0;
    for m in 0..u.rows() {
        for k in 0..u.cols() {
            let s = stencil(u, grid, m, k);
            total += (eps2 + s.dx * s.dx + s.dy * s.dy).sqrt();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Full-image stencils on a replicate-padded copy, composed afterwards.
    fn composed_oracle(img: &[Vec<f64>], eps: f64) -> Vec<Vec<f64>> {
        let (h, w) = (img.len(), img[0].len());
        let px = |i: isize, j: isize| {
            let ii = i.clamp(0, h as isize - 1) as usize;
            let jj = j.clamp(0, w as isize - 1) as usize;
            img[ii][jj]
        };
        let field = |f: &dyn Fn(isize, isize) -> f64| -> Vec<Vec<f64>> {
            (0..h as isize)
                .map(|i| (0..w as isize).map(|j| f(i, j)).collect())
                .collect()
        };
        let dx = field(&|i, j| (px(i + 1, j) - px(i - 1, j)) / 2.0);
        let dy = field(&|i, j| (px(i, j + 1) - px(i, j - 1)) / 2.0);
        let dxx = field(&|i, j| px(i + 1, j) - 2.0 * px(i, j) + px(i - 1, j));
        let dyy = field(&|i, j| px(i, j + 1) - 2.0 * px(i, j) + px(i, j - 1));
        let dxy = field(&|i, j| {
            (px(i + 1, j + 1) - px(i + 1, j - 1) - px(i - 1, j + 1) + px(i - 1, j - 1)) / 4.0
        });
        let e2 = eps * eps;
        (0..h)
            .map(|i| {
                (0..w)
                    .map(|j| {
                        let num = e2 * (dxx[i][j] + dyy[i][j]) + dx[i][j].powi(2) * dyy[i][j]
                            + dy[i][j].powi(2) * dxx[i][j]
                            - 2.0 * dx[i][j] * dy[i][j] * dxy[i][j];
                        num / (dx[i][j].powi(2) + dy[i][j].powi(2) + e2).powf(1.5)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_column_has_zero_divergence() {
        let g = GridGeometry::full(4, 5).unwrap();
        let u = DenseMatrix::filled(20, 2, 3.0);
        let d = tv_divergence(&u, &g, 0.01).unwrap();
        assert!(d.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_ramp_is_divergence_free_inside() {
        let g = GridGeometry::full(8, 8).unwrap();
        let u = DenseMatrix::from_fn(64, 1, |m, _| g.pixel_of_row(m).0 as f64);
        let d = tv_divergence(&u, &g, 0.05).unwrap();
        for m in 0..64 {
            let (i, j) = g.pixel_of_row(m);
            if (1..7).contains(&i) && (1..7).contains(&j) {
                assert_eq!(d.get(m, 0), 0.0);
            }
        }
    }

    #[test]
    fn matches_composed_stencils() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let img: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..5).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let g = GridGeometry::full(5, 5).unwrap();
        let u = DenseMatrix::from_fn(25, 1, |m, _| {
            let (i, j) = g.pixel_of_row(m);
            img[i][j]
        });
        let d = tv_divergence(&u, &g, 0.1).unwrap();
        let oracle = composed_oracle(&img, 0.1);
        for m in 0..25 {
            let (i, j) = g.pixel_of_row(m);
            assert!((d.get(m, 0) - oracle[i][j]).abs() <= 1e-12 * oracle[i][j].abs().max(1.0));
        }
    }

    #[test]
    fn quadratic_image_matches_continuous_divergence() {
        // Central differences are exact on quadratics, so interior values
        // equal the analytic div(∇u/‖∇u‖_ε).
        let (a, b, c, d0, e0) = (0.03, -0.02, 0.015, 0.4, -0.1);
        let g = GridGeometry::full(7, 6).unwrap();
        let u = DenseMatrix::from_fn(g.len(), 1, |m, _| {
            let (i, j) = g.pixel_of_row(m);
            let (x, y) = (i as f64, j as f64);
            a * x * x + b * y * y + c * x * y + d0 * x + e0 * y
        });
        let eps = 0.2;
        let div = tv_divergence(&u, &g, eps).unwrap();
        for m in 0..g.len() {
            let (i, j) = g.pixel_of_row(m);
            if i == 0 || j == 0 || i == 6 || j == 5 {
                continue;
            }
            let (x, y) = (i as f64, j as f64);
            let ux = 2.0 * a * x + c * y + d0;
            let uy = 2.0 * b * y + c * x + e0;
            let (uxx, uyy, uxy) = (2.0 * a, 2.0 * b, c);
            let n2 = ux * ux + uy * uy + eps * eps;
            let expect = (eps * eps * (uxx + uyy) + ux * ux * uyy + uy * uy * uxx
                - 2.0 * ux * uy * uxy)
                / n2.powf(1.5);
            assert!((div.get(m, 0) - expect).abs() < 1e-12, "{} vs {}", div.get(m, 0), expect);
        }
    }

    #[test]
    fn holes_use_replicate_padding() {
        // A hole at (1,1) surrounded by a constant image still yields zero.
        let mut mask = vec![true; 9];
        mask[4] = false;
        let g = GridGeometry::from_mask(3, 3, &mask).unwrap();
        let u = DenseMatrix::filled(8, 1, 2.0);
        let d = tv_divergence(&u, &g, 0.1).unwrap();
        assert!(d.as_slice().iter().all(|&v| v == 0.0));
        assert!(d.is_finite());
    }

    #[test]
    fn requires_positive_eps() {
        let g = GridGeometry::full(2, 2).unwrap();
        let u = DenseMatrix::filled(4, 1, 1.0);
        assert!(tv_divergence(&u, &g, 0.0).is_err());
        assert!(central_tv_value(&u, &g, -1.0).is_err());
    }

    #[test]
    fn central_value_of_constant() {
        let g = GridGeometry::full(3, 3).unwrap();
        let u = DenseMatrix::filled(9, 2, 5.0);
        assert!((central_tv_value(&u, &g, 0.5).unwrap() - 9.0).abs() < 1e-12);
    }
}
