//! Sweeps the TV weight of the K-means baseline and prints the median VDn
//! at each value.

use spatial_onmf::harness::{generate_phantom, run_sweep, ExperimentConfig, Method, PhantomSpec, SweepGrid};

fn main() -> spatial_onmf::Result<()> {
    let spec = PhantomSpec { noise_sigma: 0.8, seed: 2, ..PhantomSpec::default() };
    let d = generate_phantom(&spec)?;
    let mut cfg = ExperimentConfig::phantom(Method::KMeansTv, spec, 5, 1);
    cfg.sweep = SweepGrid {
        tau: vec![0.0, 0.1, 0.3, 1.0, 3.0, 10.0],
        sigma1: vec![],
        sigma2: vec![],
    };
    for point in run_sweep(&cfg, &d, None)? {
        println!("tau {:>5}  median VDn {:.4}", point.tau, point.result.median("VDn"));
    }
    Ok(())
}
