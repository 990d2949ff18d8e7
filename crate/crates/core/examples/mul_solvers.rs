//! The two multiplicative combined solvers: MUL1 with its monotone cost
//! trace, MUL2 with the central-difference TV.

use spatial_onmf::combined::{run_mul, Mul1Params, Mul2Params, MulSolver};
use spatial_onmf::harness::{generate_phantom, PhantomSpec};
use spatial_onmf::init::{InitKind, InitMethod};
use spatial_onmf::metrics::score;

fn main() -> spatial_onmf::Result<()> {
    let spec = PhantomSpec { noise_sigma: 0.8, seed: 1, ..PhantomSpec::default() };
    let d = generate_phantom(&spec)?;
    let x = d.x.clamp_strict_positive(Default::default());
    let init = InitMethod::new(InitKind::Svd, 0);

    let mul1 = Mul1Params { sigma1: 300.0, sigma2: 300.0, tau: 100.0, ..Default::default() };
    let run = run_mul(&x, spec.classes, MulSolver::Mul1(mul1), init, &d.grid, 100)?;
    println!("MUL1 cost trace:");
    for (i, c) in &run.cost_trace {
        println!("  {i:>4} {c:.4}");
    }
    let rising = run.cost_trace.windows(2).filter(|w| w[1].1 > w[0].1).count();
    println!("  increases: {rising}");
    println!("  VDn {:.4}", score(run.labels.as_slice(), d.truth.as_slice(), spec.classes)?.vd_n);

    let mul2 = Mul2Params { sigma1: 1000.0, tau: 1.0, eps_tv: 0.03, ..Default::default() };
    let run = run_mul(&x, spec.classes, MulSolver::Mul2(mul2), init, &d.grid, 100)?;
    let (first, last) = (run.cost_trace[0].1, run.cost_trace[run.cost_trace.len() - 1].1);
    println!("MUL2 cost {first:.4} -> {last:.4}");
    println!("  VDn {:.4}", score(run.labels.as_slice(), d.truth.as_slice(), spec.classes)?.vd_n);
    Ok(())
}
