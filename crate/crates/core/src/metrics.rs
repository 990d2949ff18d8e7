//! External clustering validation: contingency tables and the entropy,
//! variation-of-information and van Dongen measures (natural logarithm).

use crate::error::{Error, Result};

/// Counts `n[k][k̃]` of points in predicted cluster `k` and true class `k̃`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 { p * p.ln() } else { 0.0 }
}

impl ContingencyTable {
    /// Rows are predicted clusters, columns true classes. Rejects ragged or
    /// all-zero tables.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if cols == 0 || counts.iter().any(|r| r.len() != cols) {
            return Err(Error::DegenerateTable("table must be a nonempty rectangle".into()));
        }
        if counts.iter().flatten().all(|&c| c == 0) {
            return Err(Error::DegenerateTable("table has no data points".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut out = vec![0; self.counts[0].len()];
        for row in &self.counts {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let cols = self.counts[0].len();
        let counts = (0..cols)
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        Self { counts }
    }

    fn probs(&self) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let n = self.total() as f64;
        let joint = self
            .counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / n).collect())
            .collect();
        let rows = self.row_sums().iter().map(|&c| c as f64 / n).collect();
        let cols = self.col_sums().iter().map(|&c| c as f64 / n).collect();
        (joint, rows, cols)
    }

    fn mutual_information(&self) -> f64 {
        let (joint, pr, pc) = self.probs();
        let mut mi = 0.0;
        for (k, row) in joint.iter().enumerate() {
            for (kt, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    mi += p * (p / (pr[k] * pc[kt])).ln();
                }
            }
        }
        mi
    }

    fn marginal_entropies(&self) -> (f64, f64) {
        let (_, pr, pc) = self.probs();
        (
            -pr.iter().map(|&p| xlogx(p)).sum::<f64>(),
            -pc.iter().map(|&p| xlogx(p)).sum::<f64>(),
        )
    }

    fn dongen_numerator(&self) -> u64 {
        let n = self.total();
        let row_max: u64 = self.counts.iter().map(|r| *r.iter().max().unwrap()).sum();
        let col_max: u64 = self.transpose().counts.iter().map(|r| *r.iter().max().unwrap()).sum();
        2 * n - row_max - col_max
    }
}

/// Builds the `k × k` table from predicted and true labels.
pub fn contingency(pred: &[usize], truth: &[usize], k: usize) -> Result<ContingencyTable> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "label vectors differ in length: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::InvalidArgument(format!("label pair ({p}, {t}) not below K = {k}")));
        }
        counts[p][t] += 1;
    }
    ContingencyTable::from_counts(counts)
}

/// Conditional entropy of the classes given the clusters; lies in `[0, log K]`.
pub fn entropy(t: &ContingencyTable) -> f64 {
    let (joint, pr, _) = t.probs();
    let mut e = 0.0;
    for (k, row) in joint.iter().enumerate() {
        if pr[k] == 0.0 {
            continue;
        }
        e -= pr[k] * row.iter().map(|&p| xlogx(p / pr[k])).sum::<f64>();
    }
    e
}

/// `H(pred) + H(truth) − 2·MI`.
pub fn vi(t: &ContingencyTable) -> f64 {
    let (h, ht) = t.marginal_entropies();
    (h + ht - 2.0 * t.mutual_information()).max(0.0)
}

pub fn vd(t: &ContingencyTable) -> f64 {
    t.dongen_numerator() as f64 / (2 * t.total()) as f64
}

/// `1 − 2·MI / (H + H̃)`; zero when both sides are a single cluster.
pub fn vi_n(t: &ContingencyTable) -> f64 {
    let (h, ht) = t.marginal_entropies();
    let denom = h + ht;
    if denom == 0.0 {
        return 0.0;
    }
    (1.0 - 2.0 * t.mutual_information() / denom).clamp(0.0, 1.0)
}

/// Van Dongen criterion normalized by its worst case for the given
/// marginals; zero when the denominator vanishes.
pub fn vd_n(t: &ContingencyTable) -> f64 {
    let n = t.total();
    let max_row = *t.row_sums().iter().max().unwrap();
    let max_col = *t.col_sums().iter().max().unwrap();
    let denom = 2 * n - max_row - max_col;
    if denom == 0 {
        return 0.0;
    }
    t.dongen_numerator() as f64 / denom as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub e: f64,
    pub vi: f64,
    pub vd: f64,
    pub vd_n: f64,
    pub vi_n: f64,
}

impl Scores {
    pub fn of(t: &ContingencyTable) -> Self {
        Self {
            e: entropy(t),
            vi: vi(t),
            vd: vd(t),
            vd_n: vd_n(t),
            vi_n: vi_n(t),
        }
    }
}

/// All five measures of `pred` against `truth` with `k` labels.
pub fn score(pred: &[usize], truth: &[usize], k: usize) -> Result<Scores> {
    Ok(Scores::of(&contingency(pred, truth, k)?))
}
