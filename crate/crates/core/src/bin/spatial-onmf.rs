use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spatial_onmf::harness::{
    evaluate_label_files, load_dataset, run_experiment, run_sweep, sweep_csv, DataSource, ExperimentConfig,
    METRICS_HEADER,
};
use spatial_onmf::Result;

#[derive(Parser)]
#[command(version, about = "Spatially coherent clustering with TV-regularized orthogonal NMF")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `master_seed` (or `phantom.seed` for `phantom`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replicates; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured phantom and write data.csv, geometry.csv, truth.csv.
    Phantom(Common),
    /// Run all replicates and write metrics.csv, summary.csv and label maps.
    Run(Common),
    /// Score a label file against a truth file.
    Eval {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Label count; inferred from the files when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// Writes metrics.csv here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the config over its sweep.tau / sweep.sigma1 / sweep.sigma2 grid.
    Sweep(Common),
}

fn load(c: &Common, phantom_seed: bool) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&c.config)?;
    if let Some(seed) = c.seed {
        match (&mut cfg.data, phantom_seed) {
            (DataSource::Phantom(spec), true) => spec.seed = seed,
            _ => cfg.master_seed = seed,
        }
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Phantom(c) => {
            let cfg = load(&c, true)?;
            let d = load_dataset(&cfg)?;
            d.write_dir(&c.out)?;
            eprintln!("wrote {} pixels x {} channels to {}", d.x.rows(), d.x.cols(), c.out.display());
        }
        Command::Run(c) => {
            let cfg = load(&c, false)?;
            let d = load_dataset(&cfg)?;
            let res = run_experiment(&cfg, &d, c.threads)?;
            res.write_outputs(&c.out, &d.grid, cfg.write_maps)?;
            for (r, msg) in res.failures() {
                eprintln!("replicate {r} failed: {msg}");
            }
            eprintln!("{}: median VDn {:.4} over {} replicates", cfg.method, res.median("VDn"), res.records.len());
        }
        Command::Eval { labels, truth, k, out } => {
            let s = evaluate_label_files(labels, truth, k)?;
            let row = format!("{METRICS_HEADER}\nEVAL,1,{},{},{},{},{},\n", s.e, s.vi, s.vd, s.vd_n, s.vi_n);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("metrics.csv"), row)?;
                }
                None => print!("{row}"),
            }
        }
        Command::Sweep(c) => {
            let cfg = load(&c, false)?;
            let d = load_dataset(&cfg)?;
            let points = run_sweep(&cfg, &d, c.threads)?;
            fs::create_dir_all(&c.out)?;
            fs::write(c.out.join("sweep.csv"), sweep_csv(&points))?;
            eprintln!("{} grid points written to {}", points.len(), c.out.join("sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
