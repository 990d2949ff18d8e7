use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::matrix::DenseMatrix;
use crate::separated::ClusterLabels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Horizontal bands of (nearly) equal height.
    Stripes,
    /// Near-square tiling; surplus tiles join the last class.
    Rectangles,
    /// Nearest of `K` random seed pixels.
    Voronoi,
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "STRIPES" => Ok(Self::Stripes),
            "RECTANGLES" => Ok(Self::Rectangles),
            "VORONOI" => Ok(Self::Voronoi),
            other => Err(Error::InvalidArgument(format!("unknown layout {other:?}"))),
        }
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Stripes => "STRIPES",
            Self::Rectangles => "RECTANGLES",
            Self::Voronoi => "VORONOI",
        })
    }
}

/// Synthetic hyperspectral image with spatially contiguous classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub height: usize,
    pub width: usize,
    pub classes: usize,
    pub channels: usize,
    pub layout: Layout,
    /// Standard deviation of the additive Gaussian noise.
    pub noise_sigma: f64,
    /// Weight in `[0, 1]` of the spectrum shared by all classes.
    pub overlap: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            height: 32,
            width: 32,
            classes: 4,
            channels: 50,
            layout: Layout::Rectangles,
            noise_sigma: 0.3,
            overlap: 0.3,
            seed: 0,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 || self.channels == 0 {
            return Err(Error::InvalidArgument("phantom dimensions must be positive".into()));
        }
        if self.classes == 0 || self.classes > self.height * self.width {
            return Err(Error::InvalidArgument(format!(
                "phantom needs 1 <= classes <= {} pixels, got {}",
                self.height * self.width,
                self.classes
            )));
        }
        if self.layout == Layout::Stripes && self.classes > self.height {
            return Err(Error::InvalidArgument(format!(
                "{} stripes do not fit in {} rows",
                self.classes, self.height
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise must be nonnegative, got {}", self.noise_sigma)));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::InvalidArgument(format!("overlap must lie in [0, 1], got {}", self.overlap)));
        }
        Ok(())
    }
}

/// Data matrix, pixel geometry and ground-truth classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DenseMatrix,
    pub grid: GridGeometry,
    pub truth: ClusterLabels,
}

const DATA_FILE: &str = "data.csv";
const GEOMETRY_FILE: &str = "geometry.csv";
const TRUTH_FILE: &str = "truth.csv";

impl Dataset {
    pub fn new(x: DenseMatrix, grid: GridGeometry, truth: ClusterLabels) -> Result<Self> {
        if x.rows() != grid.len() || truth.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} rows, {} pixels and {} labels",
                x.rows(),
                grid.len(),
                truth.len()
            )));
        }
        Ok(Self { x, grid, truth })
    }

    /// Writes `data.csv`, `geometry.csv` and `truth.csv` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.x.write_text(dir.join(DATA_FILE))?;
        self.grid.write_text(dir.join(GEOMETRY_FILE))?;
        self.truth.write_csv(dir.join(TRUTH_FILE))
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let x = DenseMatrix::read_text(dir.join(DATA_FILE))?;
        let grid = GridGeometry::read_text(dir.join(GEOMETRY_FILE))?;
        let truth = ClusterLabels::read_csv_infer(dir.join(TRUTH_FILE))?;
        Self::new(x, grid, truth)
    }
}

fn layout_labels(spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let (h, w, k) = (spec.height, spec.width, spec.classes);
    let mut labels = vec![0; h * w];
    match spec.layout {
        Layout::Stripes => {
            for i in 0..h {
                labels[i * w..(i + 1) * w].fill(i * k / h);
            }
        }
        Layout::Rectangles => {
            let tiles_x = (k as f64).sqrt().ceil() as usize;
            let tiles_y = k.div_ceil(tiles_x);
            for i in 0..h {
                for j in 0..w {
                    let tile = (i * tiles_y / h) * tiles_x + j * tiles_x / w;
                    labels[i * w + j] = tile.min(k - 1);
                }
            }
        }
        Layout::Voronoi => {
            let mut cells: Vec<usize> = (0..h * w).collect();
            cells.shuffle(rng);
            let seeds: Vec<(f64, f64)> = cells[..k].iter().map(|&c| ((c / w) as f64, (c % w) as f64)).collect();
            for i in 0..h {
                for j in 0..w {
                    let d = |s: &(f64, f64)| (s.0 - i as f64).powi(2) + (s.1 - j as f64).powi(2);
                    let (best, _) = seeds
                        .iter()
                        .enumerate()
                        .fold((0, f64::INFINITY), |acc, (c, s)| if d(s) < acc.1 { (c, d(s)) } else { acc });
                    labels[i * w + j] = best;
                }
            }
        }
    }
    labels
}

/// Sum of three Gaussian bumps with random centres and heights in `[0.5, 1]`.
fn bumps(channels: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let width = (channels as f64 / 25.0).max(0.75);
    let peaks: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.random_range(0.0..channels as f64), rng.random_range(0.5..1.0)))
        .collect();
    (0..channels)
        .map(|c| {
            peaks
                .iter()
                .map(|&(mu, a)| a * (-0.5 * ((c as f64 - mu) / width).powi(2)).exp())
                .sum()
        })
        .collect()
}

/// Class signatures `overlap·shared + (1 − overlap)·own_k`.
pub fn class_signatures(spec: &PhantomSpec) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let shared = bumps(spec.channels, &mut rng);
    let own: Vec<Vec<f64>> = (0..spec.classes).map(|_| bumps(spec.channels, &mut rng)).collect();
    DenseMatrix::from_fn(spec.classes, spec.channels, |k, c| {
        spec.overlap * shared[c] + (1.0 - spec.overlap) * own[k][c]
    })
}

/// Every pixel's spectrum is its class signature plus Gaussian noise,
/// clipped at zero. Output is a function of `spec` alone.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = layout_labels(spec, &mut rng);
    let sig = class_signatures(spec);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let x = DenseMatrix::from_fn(labels.len(), spec.channels, |m, c| {
        let value = sig.get(labels[m], c) + noise.sample(&mut rng);
        if value > 0.0 { value } else { 0.0 }
    });
    let grid = GridGeometry::full(spec.height, spec.width)?;
    let truth = ClusterLabels::new(labels, spec.classes)?;
    Dataset::new(x, grid, truth)
}
