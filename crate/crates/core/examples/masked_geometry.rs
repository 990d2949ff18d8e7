//! Clustering on an irregular annotated region: pixels outside a disc are
//! dropped, TV only couples annotated neighbours, and the label map shows
//! the masked pixels in white.

use spatial_onmf::combined::{palm_run, PalmParams};
use spatial_onmf::harness::{generate_phantom, label_map_text, Layout, PhantomSpec};
use spatial_onmf::init::{InitKind, InitMethod};
use spatial_onmf::metrics::score;
use spatial_onmf::GridGeometry;

fn main() -> spatial_onmf::Result<()> {
    let spec = PhantomSpec {
        height: 20,
        width: 20,
        classes: 3,
        layout: Layout::Stripes,
        noise_sigma: 0.6,
        seed: 9,
        ..PhantomSpec::default()
    };
    let full = generate_phantom(&spec)?;
    let mask: Vec<bool> = full
        .grid
        .pixels()
        .iter()
        .map(|&(i, j)| (i as f64 - 9.5).hypot(j as f64 - 9.5) < 9.0)
        .collect();
    let grid = GridGeometry::from_mask(spec.height, spec.width, &mask)?;
    let keep: Vec<usize> = (0..mask.len()).filter(|&m| mask[m]).collect();
    let x = full.x.select_rows(&keep).clamp_strict_positive(Default::default());
    let truth: Vec<usize> = keep.iter().map(|&m| full.truth.as_slice()[m]).collect();
    println!("{} of {} pixels annotated", grid.len(), mask.len());

    for tau in [0.0, 10.0] {
        let p = PalmParams { sigma1: 300.0, sigma2: 300.0, tau, ..PalmParams::palm() };
        let run = palm_run(&x, spec.classes, &p, InitMethod::new(InitKind::Svd, 0), &grid)?;
        println!("tau {tau:>4}: VDn {:.4}", score(run.labels.as_slice(), &truth, spec.classes)?.vd_n);
        if tau > 0.0 {
            print!("{}", label_map_text(&run.labels, &grid)?);
        }
    }
    Ok(())
}
