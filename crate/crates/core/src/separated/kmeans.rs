use crate::error::{Error, Result};
use crate::init::{kmeanspp_centroids, nearest, one_hot, squared_distance};
use crate::matrix::DenseMatrix;

/// Safety cap; Lloyd iterations stop earlier once assignments are stable.
const MAX_LLOYD_ITERS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// Binary membership matrix.
    pub u: DenseMatrix,
    pub centroids: DenseMatrix,
    pub labels: Vec<usize>,
    pub iterations: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub objective_trace: Vec<f64>,
}

fn objective(x: &DenseMatrix, c: &DenseMatrix, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(m, &l)| squared_distance(x.row(m), c.row(l)))
        .sum()
}

/// Cluster means; empty clusters get the point farthest from its own
/// centroid, which is moved into the empty cluster.
fn update_centroids(x: &DenseMatrix, old: &DenseMatrix, labels: &mut [usize], k: usize) -> DenseMatrix {
    let n = x.cols();
    let mut sums = DenseMatrix::zeros(k, n);
    let mut counts = vec![0usize; k];
    for (m, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(x.row(m)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            sums.row_mut(c).iter_mut().for_each(|v| *v *= inv);
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let far = (0..x.rows())
            .filter(|&m| counts[labels[m]] > 1)
            .max_by(|&a, &b| {
                let da = squared_distance(x.row(a), old.row(labels[a]));
                let db = squared_distance(x.row(b), old.row(labels[b]));
                da.total_cmp(&db).then(b.cmp(&a))
            });
        if let Some(m) = far {
            counts[labels[m]] -= 1;
            labels[m] = c;
            counts[c] = 1;
            sums.row_mut(c).copy_from_slice(x.row(m));
        }
    }
    sums
}

/// Lloyd's algorithm from K-means++ seeds, iterated until no assignment
/// changes.
pub fn kmeans_cluster(x: &DenseMatrix, k: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || k > x.rows() {
        return Err(Error::InvalidArgument(format!("K = {k} must lie in 1..={}", x.rows())));
    }
    let mut centroids = kmeanspp_centroids(x, k, seed)?;
    let mut labels: Vec<usize> = (0..x.rows()).map(|m| nearest(x.row(m), &centroids).0).collect();
    let mut trace = vec![objective(x, &centroids, &labels)];
    let mut iterations = 0;
    while iterations < MAX_LLOYD_ITERS {
        iterations += 1;
        centroids = update_centroids(x, &centroids, &mut labels, k);
        let next: Vec<usize> = (0..x.rows()).map(|m| nearest(x.row(m), &centroids).0).collect();
        let stable = next == labels;
        labels = next;
        trace.push(objective(x, &centroids, &labels));
        if stable {
            break;
        }
    }
    centroids = update_centroids(x, &centroids, &mut labels, k);
    Ok(KMeansResult {
        u: one_hot(&labels, k),
        centroids,
        labels,
        iterations,
        objective_trace: trace,
    })
}
