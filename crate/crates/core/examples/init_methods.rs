//! K-means++ and NNDSVD starting points compared by their initial fit and
//! by what a short multiplicative run makes of them.

use spatial_onmf::harness::{generate_phantom, PhantomSpec};
use spatial_onmf::init::{init_factors, truncated_svd, InitKind, InitMethod};
use spatial_onmf::metrics::score;
use spatial_onmf::separated::{harden, onmf_multiplicative, MuVariant};

fn main() -> spatial_onmf::Result<()> {
    let spec = PhantomSpec { noise_sigma: 0.5, seed: 4, ..PhantomSpec::default() };
    let d = generate_phantom(&spec)?;
    let x = d.x.clamp_strict_positive(Default::default());
    let k = spec.classes;

    let svd = truncated_svd(&x, k + 2, 0)?;
    let s = &svd.singular_values;
    println!("leading singular values: {}", s.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" "));

    for kind in [InitKind::KMeansPlusPlus, InitKind::Svd] {
        for seed in [0, 1] {
            let init = InitMethod::new(kind, seed);
            let (u, v) = init_factors(&x, k, init)?;
            let fit = x.sub(&u.matmul(&v)?)?.frobenius_norm() / x.frobenius_norm();
            let start = score(harden(&u, seed).as_slice(), d.truth.as_slice(), k)?.vd_n;
            let r = onmf_multiplicative(&x, k, MuVariant::Ding, init, 100)?;
            let end = score(harden(&r.u, seed).as_slice(), d.truth.as_slice(), k)?.vd_n;
            println!("{kind:<9} seed {seed}: relative residual {fit:.4}  VDn {start:.4} -> {end:.4} after 100 Ding steps");
        }
    }
    Ok(())
}
