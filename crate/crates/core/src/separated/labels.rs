use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Hard cluster assignment, one label in `0..k` per data row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterLabels {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((m, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::InvalidArgument(format!("label {l} of row {m} not below K = {k}")));
        }
        Ok(Self { labels, k })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Binary `M × K` membership matrix.
    pub fn to_membership(&self) -> DenseMatrix {
        crate::init::one_hot(&self.labels, self.k)
    }

    /// Reads one integer per line; `k` is the declared label count.
    pub fn read_csv(path: impl AsRef<Path>, k: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut labels = Vec::new();
        for (lno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let l = line
                .parse::<usize>()
                .map_err(|e| Error::parse(path, lno + 1, format!("bad label {line:?}: {e}")))?;
            if l >= k {
                return Err(Error::parse(path, lno + 1, format!("label {l} not below K = {k}")));
            }
            labels.push(l);
        }
        Ok(Self { labels, k })
    }

    /// Reads labels and infers `K` as one plus the largest label.
    pub fn read_csv_infer(path: impl AsRef<Path>) -> Result<Self> {
        let mut out = Self::read_csv(path, usize::MAX)?;
        out.k = out.labels.iter().max().map_or(1, |&l| l + 1);
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.labels.len() * 3);
        for l in &self.labels {
            writeln!(s, "{l}").expect("writing to a String cannot fail");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Row-wise argmax of `u`. Exact ties are broken by a uniform draw among the
/// maximizers from a generator seeded with `seed`.
pub fn harden(u: &DenseMatrix, seed: u64) -> ClusterLabels {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ties = Vec::with_capacity(u.cols());
    let labels = (0..u.rows())
        .map(|m| {
            let row = u.row(m);
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ties.clear();
            ties.extend((0..row.len()).filter(|&k| row[k] == best));
            match ties.len() {
                0 => 0,
                1 => ties[0],
                n => ties[rng.random_range(0..n)],
            }
        })
        .collect();
    ClusterLabels { labels, k: u.cols() }
}
