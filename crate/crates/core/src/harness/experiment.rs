use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::combined::{ipalm_run, palm_run, run_mul, spring_run, Mul1Params, Mul2Params, MulSolver, PalmParams};
use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::init::{InitKind, InitMethod};
use crate::matrix::{DenseMatrix, ProjectionBounds};
use crate::metrics::{score, Scores};
use crate::separated::{onmf_tv_pipeline, BaseMethod, ClusterLabels, SeparatedConfig};

use super::config::{DataSource, ExperimentConfig, Method, MethodParams};
use super::pgm::emit_label_map;
use super::phantom::{generate_phantom, Dataset};

pub const METRICS_HEADER: &str = "method,replicate,E,VI,VD,VDn,VIn,seconds";
pub const SUMMARY_HEADER: &str = "method,metric,n,min,q1,median,q3,max";
pub const SWEEP_HEADER: &str = "method,tau,sigma1,sigma2,replicate,E,VI,VD,VDn,VIn,seconds";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r`, computable without running replicates `1..r`.
pub fn replicate_seed(master_seed: u64, r: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(r as u64))
}

/// Fully resolved solver for one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverSetup {
    Separated(SeparatedConfig),
    Mul(MulSolver, InitMethod),
    Palm(Method, PalmParams, InitMethod),
}

impl SolverSetup {
    /// Applies `params` on top of the method defaults. Combined solvers
    /// start from SVD unless told otherwise.
    pub fn resolve(method: Method, params: &MethodParams, seed: u64) -> Self {
        let init = InitMethod::new(params.init.unwrap_or(InitKind::Svd), seed);
        match method {
            Method::KMeansTv | Method::OnmfTvChoi | Method::OnmfTvDing => {
                let base = match method {
                    Method::KMeansTv => BaseMethod::KMeans,
                    Method::OnmfTvChoi => BaseMethod::MuChoi,
                    _ => BaseMethod::MuDing,
                };
                let mut cfg = SeparatedConfig::defaults(base, seed);
                cfg.tau = params.tau.unwrap_or(cfg.tau);
                cfg.i_max = params.i_max.unwrap_or(cfg.i_max);
                cfg.init.kind = params.init.unwrap_or(cfg.init.kind);
                cfg.prox_iters = params.prox_iters.unwrap_or(cfg.prox_iters);
                Self::Separated(cfg)
            }
            Method::Mul1 => {
                let d = Mul1Params::default();
                let p = Mul1Params {
                    sigma1: params.sigma1.unwrap_or(d.sigma1),
                    sigma2: params.sigma2.unwrap_or(d.sigma2),
                    tau: params.tau.unwrap_or(d.tau),
                    eps_tv: params.eps_tv.unwrap_or(d.eps_tv),
                    i_max: params.i_max.unwrap_or(d.i_max),
                };
                Self::Mul(MulSolver::Mul1(p), init)
            }
            Method::Mul2 => {
                let d = Mul2Params::default();
                let p = Mul2Params {
                    sigma1: params.sigma1.unwrap_or(d.sigma1),
                    tau: params.tau.unwrap_or(d.tau),
                    eps_tv: params.eps_tv.unwrap_or(d.eps_tv),
                    i_max: params.i_max.unwrap_or(d.i_max),
                };
                Self::Mul(MulSolver::Mul2(p), init)
            }
            Method::Palm | Method::Ipalm | Method::Spring => {
                let d = match method {
                    Method::Palm => PalmParams::palm(),
                    Method::Ipalm => PalmParams::ipalm(),
                    _ => PalmParams::spring(),
                };
                let p = PalmParams {
                    sigma1: params.sigma1.unwrap_or(d.sigma1),
                    sigma2: params.sigma2.unwrap_or(d.sigma2),
                    tau: params.tau.unwrap_or(d.tau),
                    i_max: params.i_max.unwrap_or(d.i_max),
                    subsamples: params.subsamples.unwrap_or(d.subsamples),
                    power_iters: params.power_iters.unwrap_or(d.power_iters),
                    prox_iters: params.prox_iters.unwrap_or(d.prox_iters),
                    seed,
                    ..d
                };
                Self::Palm(method, p, init)
            }
        }
    }

    pub fn tau(&self) -> f64 {
        match self {
            Self::Separated(c) => c.tau,
            Self::Mul(MulSolver::Mul1(p), _) => p.tau,
            Self::Mul(MulSolver::Mul2(p), _) => p.tau,
            Self::Palm(_, p, _) => p.tau,
        }
    }

    pub fn sigma1(&self) -> Option<f64> {
        match self {
            Self::Separated(_) => None,
            Self::Mul(MulSolver::Mul1(p), _) => Some(p.sigma1),
            Self::Mul(MulSolver::Mul2(p), _) => Some(p.sigma1),
            Self::Palm(_, p, _) => Some(p.sigma1),
        }
    }

    pub fn sigma2(&self) -> Option<f64> {
        match self {
            Self::Separated(_) | Self::Mul(MulSolver::Mul2(_), _) => None,
            Self::Mul(MulSolver::Mul1(p), _) => Some(p.sigma2),
            Self::Palm(_, p, _) => Some(p.sigma2),
        }
    }

    /// Initializes, solves and hardens.
    pub fn solve(&self, x: &DenseMatrix, k: usize, grid: &GridGeometry) -> Result<ClusterLabels> {
        Ok(match *self {
            Self::Separated(cfg) => onmf_tv_pipeline(x, k, &cfg, grid)?.labels,
            Self::Mul(solver, init) => run_mul(x, k, solver, init, grid, solver.i_max().max(1))?.labels,
            Self::Palm(Method::Palm, p, init) => palm_run(x, k, &p, init, grid)?.labels,
            Self::Palm(Method::Ipalm, p, init) => ipalm_run(x, k, &p, init, grid)?.labels,
            Self::Palm(_, p, init) => spring_run(x, k, &p, init, grid)?.labels,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    /// 1-based replicate index.
    pub replicate: usize,
    pub seed: u64,
    /// Labels and scores, or the solver error message.
    pub outcome: std::result::Result<(ClusterLabels, Scores), String>,
    /// Wall time including initialization.
    pub seconds: f64,
}

impl ReplicateRecord {
    pub fn scores(&self) -> Option<&Scores> {
        self.outcome.as_ref().ok().map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub method: Method,
    pub records: Vec<ReplicateRecord>,
}

/// `(metric, value)` columns of the per-replicate table.
fn metric_values(s: Option<&Scores>) -> [(&'static str, f64); 5] {
    let s = s.copied().unwrap_or(Scores {
        e: f64::NAN,
        vi: f64::NAN,
        vd: f64::NAN,
        vd_n: f64::NAN,
        vi_n: f64::NAN,
    });
    [("E", s.e), ("VI", s.vi), ("VD", s.vd), ("VDn", s.vd_n), ("VIn", s.vi_n)]
}

/// Median and quartiles by linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// NaNs are dropped; `None` when nothing remains.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            n: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

impl ExperimentResult {
    pub fn failures(&self) -> impl Iterator<Item = (usize, &str)> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.replicate, e.as_str())))
    }

    /// Values of one column (`E`, `VI`, `VD`, `VDn`, `VIn` or `seconds`).
    pub fn column(&self, metric: &str) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| {
                if metric == "seconds" {
                    return r.seconds;
                }
                metric_values(r.scores())
                    .into_iter()
                    .find(|(name, _)| *name == metric)
                    .map_or(f64::NAN, |(_, v)| v)
            })
            .collect()
    }

    pub fn median(&self, metric: &str) -> f64 {
        FiveNumber::of(&self.column(metric)).map_or(f64::NAN, |s| s.median)
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = format!("{METRICS_HEADER}\n");
        for r in &self.records {
            write!(out, "{},{}", self.method, r.replicate).unwrap();
            for (_, v) in metric_values(r.scores()) {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{:.6}", r.seconds).unwrap();
        }
        out
    }

    /// One row per metric; the `seconds` row is last.
    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_HEADER}\n");
        for metric in ["E", "VI", "VD", "VDn", "VIn", "seconds"] {
            match FiveNumber::of(&self.column(metric)) {
                Some(s) => writeln!(
                    out,
                    "{},{metric},{},{},{},{},{},{}",
                    self.method, s.n, s.min, s.q1, s.median, s.q3, s.max
                ),
                None => writeln!(out, "{},{metric},0,NaN,NaN,NaN,NaN,NaN", self.method),
            }
            .unwrap();
        }
        out
    }

    /// Writes `metrics.csv`, `summary.csv` and, with `maps`, one
    /// `labels_r<k>.csv` and `map_r<k>.pgm` per successful replicate.
    pub fn write_outputs(&self, dir: impl AsRef<Path>, grid: &GridGeometry, maps: bool) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("metrics.csv"), self.metrics_csv())?;
        fs::write(dir.join("summary.csv"), self.summary_csv())?;
        if maps {
            for r in &self.records {
                if let Ok((labels, _)) = &r.outcome {
                    labels.write_csv(dir.join(format!("labels_r{}.csv", r.replicate)))?;
                    emit_label_map(labels, grid, dir.join(format!("map_r{}.pgm", r.replicate)))?;
                }
            }
        }
        Ok(())
    }
}

/// Materializes the configured dataset.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.data {
        DataSource::Phantom(spec) => generate_phantom(spec),
        DataSource::Directory(dir) => Dataset::read_dir(dir),
    }
}

fn run_replicate(cfg: &ExperimentConfig, params: &MethodParams, x: &DenseMatrix, d: &Dataset, r: usize) -> ReplicateRecord {
    let seed = replicate_seed(cfg.master_seed, r);
    let setup = SolverSetup::resolve(cfg.method, params, seed);
    let start = Instant::now();
    let labels = setup.solve(x, cfg.k, &d.grid);
    let seconds = start.elapsed().as_secs_f64();
    let k = cfg.k.max(d.truth.k());
    let outcome = labels
        .and_then(|l| score(l.as_slice(), d.truth.as_slice(), k).map(|s| (l, s)))
        .map_err(|e| e.to_string());
    ReplicateRecord { replicate: r, seed, outcome, seconds }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn check_dataset(cfg: &ExperimentConfig, d: &Dataset) -> Result<()> {
    cfg.validate()?;
    if d.x.min_value() < 0.0 || !d.x.is_finite() {
        return Err(Error::InvalidArgument("data must be finite and nonnegative".into()));
    }
    if cfg.k > d.x.rows() {
        return Err(Error::InvalidArgument(format!("k = {} exceeds {} pixels", cfg.k, d.x.rows())));
    }
    Ok(())
}

fn replicates(
    cfg: &ExperimentConfig,
    params: &MethodParams,
    x: &DenseMatrix,
    d: &Dataset,
    pool: &rayon::ThreadPool,
) -> Vec<ReplicateRecord> {
    pool.install(|| {
        (1..=cfg.replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, params, x, d, r))
            .collect()
    })
}

/// Runs every replicate on `d`, in parallel over replicates with results
/// ordered by replicate index. The data is clamped into
/// `[1e-16, 1e35]` first. Solver errors are recorded, not propagated.
pub fn run_experiment(cfg: &ExperimentConfig, d: &Dataset, threads: Option<usize>) -> Result<ExperimentResult> {
    check_dataset(cfg, d)?;
    let x = d.x.clamp_strict_positive(ProjectionBounds::default());
    let records = replicates(cfg, &cfg.params, &x, d, &pool(threads)?);
    Ok(ExperimentResult { method: cfg.method, records })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub tau: f64,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub result: ExperimentResult,
}

fn axis(values: &[f64]) -> Vec<Option<f64>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

/// Runs the experiment at every point of the `τ × σ₁ × σ₂` grid.
pub fn run_sweep(cfg: &ExperimentConfig, d: &Dataset, threads: Option<usize>) -> Result<Vec<SweepPoint>> {
    check_dataset(cfg, d)?;
    let x = d.x.clamp_strict_positive(ProjectionBounds::default());
    let pool = pool(threads)?;
    let mut points = Vec::new();
    for tau in axis(&cfg.sweep.tau) {
        for sigma1 in axis(&cfg.sweep.sigma1) {
            for sigma2 in axis(&cfg.sweep.sigma2) {
                let params = MethodParams {
                    tau: tau.or(cfg.params.tau),
                    sigma1: sigma1.or(cfg.params.sigma1),
                    sigma2: sigma2.or(cfg.params.sigma2),
                    ..cfg.params
                };
                let setup = SolverSetup::resolve(cfg.method, &params, 0);
                let records = replicates(cfg, &params, &x, d, &pool);
                points.push(SweepPoint {
                    tau: setup.tau(),
                    sigma1: setup.sigma1(),
                    sigma2: setup.sigma2(),
                    result: ExperimentResult { method: cfg.method, records },
                });
            }
        }
    }
    Ok(points)
}

/// Long-form sweep table; inapplicable σ columns are left empty.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        for r in &p.result.records {
            write!(out, "{},{},{},{},{}", p.result.method, p.tau, opt(p.sigma1), opt(p.sigma2), r.replicate).unwrap();
            for (_, v) in metric_values(r.scores()) {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{:.6}", r.seconds).unwrap();
        }
    }
    out
}

/// Scores a label file against a truth file; `K` defaults to the larger
/// inferred label count.
pub fn evaluate_label_files(labels: impl AsRef<Path>, truth: impl AsRef<Path>, k: Option<usize>) -> Result<Scores> {
    let pred = ClusterLabels::read_csv_infer(labels)?;
    let truth = ClusterLabels::read_csv_infer(truth)?;
    let k = k.unwrap_or(pred.k().max(truth.k()));
    score(pred.as_slice(), truth.as_slice(), k)
}
