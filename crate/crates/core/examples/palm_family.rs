//! PALM, iPALM and SPRING on one phantom: objective decrease, orthogonality
//! of the membership and clustering quality.

use spatial_onmf::combined::{ipalm_run, palm_run, spring_run, PalmParams, PalmRun};
use spatial_onmf::harness::{generate_phantom, PhantomSpec};
use spatial_onmf::init::{InitKind, InitMethod};
use spatial_onmf::metrics::score;
use spatial_onmf::{DenseMatrix, GridGeometry, Result};

type Solver = fn(&DenseMatrix, usize, &PalmParams, InitMethod, &GridGeometry) -> Result<PalmRun>;

fn main() -> Result<()> {
    let spec = PhantomSpec { noise_sigma: 0.8, seed: 1, ..PhantomSpec::default() };
    let d = generate_phantom(&spec)?;
    let x = d.x.clamp_strict_positive(Default::default());
    let init = InitMethod::new(InitKind::Svd, 0);

    let solvers: [(&str, PalmParams, Solver); 3] = [
        ("PALM", PalmParams::palm(), palm_run),
        ("iPALM", PalmParams::ipalm(), ipalm_run),
        ("SPRING", PalmParams { subsamples: 10, ..PalmParams::spring() }, spring_run),
    ];
    for (name, base, solve) in solvers {
        let p = PalmParams { sigma1: 300.0, sigma2: 300.0, tau: 20.0, seed: 5, ..base };
        let run = solve(&x, spec.classes, &p, init, &d.grid)?;
        let u = &run.state.u;
        let gram = u.matmul_tn(u)?;
        let off_diag: f64 = (0..spec.classes)
            .flat_map(|i| (0..spec.classes).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| gram.get(i, j).abs())
            .sum();
        println!(
            "{name:<7} objective {:>10.2} -> {:>10.2}  off-diagonal |UᵀU| {:.2e}  VDn {:.4}",
            run.trace[0],
            run.trace[run.trace.len() - 1],
            off_diag,
            score(run.labels.as_slice(), d.truth.as_slice(), spec.classes)?.vd_n
        );
    }
    Ok(())
}
