//! Denoises a piecewise-constant image with the TV prox and prints the
//! objective trace and the error against the clean image.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use spatial_onmf::tv::{tv_prox_objective, tv_prox_traced};
use spatial_onmf::GridGeometry;

fn main() -> spatial_onmf::Result<()> {
    let grid = GridGeometry::full(24, 24)?;
    let clean: Vec<f64> = grid
        .pixels()
        .iter()
        .map(|&(i, j)| if (i as f64 - 12.0).hypot(j as f64 - 12.0) < 7.0 { 1.0 } else { 0.0 })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let noisy: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();

    let rmse = |a: &[f64]| (a.iter().zip(&clean).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
    println!("noisy rmse {:.4}", rmse(&noisy));
    for tau in [0.05, 0.15, 0.4, 1.0] {
        let report = tv_prox_traced(&noisy, tau, &grid, 200)?;
        let obj = &report.objectives;
        println!(
            "tau {tau:<5} rmse {:.4}  objective {:.3} -> {:.3} (iter 5: {:.3})  at clean image {:.3}",
            rmse(&report.solution),
            obj[0],
            obj[obj.len() - 1],
            obj[5],
            tv_prox_objective(&clean, &noisy, tau, &grid),
        );
    }
    Ok(())
}
