//! Replicated experiment from a config file, as the `run` subcommand does,
//! printing the summary table and writing outputs to a temp directory.
//!
//! `cargo run --example phantom_experiment -- configs/palm.cfg`

use spatial_onmf::harness::{load_dataset, run_experiment, ExperimentConfig};

fn main() -> spatial_onmf::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/onmf_tv_ding.cfg".into());
    let mut cfg = ExperimentConfig::from_file(&path)?;
    cfg.replicates = cfg.replicates.min(5);
    let d = load_dataset(&cfg)?;
    let res = run_experiment(&cfg, &d, None)?;
    print!("{}", res.summary_csv());

    let out = std::env::temp_dir().join(format!("spatial-onmf-{}", cfg.method));
    res.write_outputs(&out, &d.grid, true)?;
    println!("outputs in {}", out.display());
    Ok(())
}
