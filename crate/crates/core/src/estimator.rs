//! Greedy packing and covering counts on finite populations, and the
//! entropy-exponent regression.
//!
//! Counts are relative to the population they are computed on: a packing of
//! a finite sample is a lower envelope of the packing number of the class.

use serde::Serialize;

use crate::metrics::DistanceMatrix;
use crate::numeric::{fit_line, LineFit};
use crate::{Error, Result};

/// Scans points in index order and keeps a point iff it is more than `eps`
/// away from every point kept so far.
pub fn greedy_packing(dm: &DistanceMatrix, eps: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..dm.len() {
        let row = dm.row(i);
        if kept.iter().all(|&k| row[k] > eps) {
            kept.push(i);
        }
    }
    kept
}

/// Repeatedly picks the point whose closed `eps`-ball holds the most
/// uncovered points (lowest index on ties) until every point is covered.
pub fn greedy_cover(dm: &DistanceMatrix, eps: f64) -> Vec<usize> {
    let n = dm.len();
    let mut covered = vec![false; n];
    let mut gain: Vec<usize> = (0..n)
        .map(|i| dm.row(i).iter().filter(|&&d| d <= eps).count())
        .collect();
    let mut left = n;
    let mut centers = Vec::new();
    while left > 0 {
        let c = (0..n)
            .max_by(|&a, &b| gain[a].cmp(&gain[b]).then(b.cmp(&a)))
            .expect("nonempty");
        centers.push(c);
        for (j, cov) in covered.iter_mut().enumerate() {
            if !*cov && dm.get(c, j) <= eps {
                *cov = true;
                left -= 1;
                for (i, g) in gain.iter_mut().enumerate() {
                    if dm.get(i, j) <= eps {
                        *g -= 1;
                    }
                }
            }
        }
    }
    centers
}

/// All pairwise distances among `idx` exceed `eps`.
pub fn is_packing(dm: &DistanceMatrix, idx: &[usize], eps: f64) -> bool {
    idx.iter()
        .enumerate()
        .all(|(a, &i)| idx[a + 1..].iter().all(|&j| dm.get(i, j) > eps))
}

/// Every point lies within `eps` of some center.
pub fn is_cover(dm: &DistanceMatrix, centers: &[usize], eps: f64) -> bool {
    (0..dm.len()).all(|j| centers.iter().any(|&c| dm.get(c, j) <= eps))
}

/// One row of an entropy scan. Serialized with the CSV columns
/// `eps,pack,cover,n,seed,metric,secs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub eps: f64,
    pub pack: usize,
    pub cover: usize,
    pub n: usize,
    pub seed: u64,
    pub metric: String,
    /// Wall time of the row; zero unless timings were requested, so that
    /// outputs stay byte-identical across runs.
    pub secs: f64,
}

/// Greedy packing and cover counts for every `eps` on one distance matrix.
pub fn scan(dm: &DistanceMatrix, eps_grid: &[f64], seed: u64, metric: &str, timings: bool) -> Vec<ScanRecord> {
    eps_grid
        .iter()
        .map(|&eps| {
            let start = std::time::Instant::now();
            let pack = greedy_packing(dm, eps).len();
            let cover = greedy_cover(dm, eps).len();
            ScanRecord {
                eps,
                pack,
                cover,
                n: dm.len(),
                seed,
                metric: metric.to_string(),
                secs: if timings { start.elapsed().as_secs_f64() } else { 0.0 },
            }
        })
        .collect()
}

/// Least-squares slope of `log log pack` against `log(1/eps)`: the entropy
/// exponent `r` in `log M ≍ eps^{-r}`.
pub fn scaling_fit(records: &[ScanRecord]) -> Result<LineFit> {
    let mut eps: Vec<f64> = records.iter().map(|r| r.eps).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if records.len() < 4 || eps.len() != records.len() {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 records with distinct eps, got {} ({} distinct)",
            records.len(),
            eps.len()
        )));
    }
    if let Some(r) = records.iter().find(|r| r.pack < 2) {
        return Err(Error::DegenerateFit(format!(
            "packing count {} at eps = {} has no entropy",
            r.pack, r.eps
        )));
    }
    if records.iter().all(|r| r.pack == records[0].pack) {
        return Err(Error::DegenerateFit("packing counts are constant".into()));
    }
    let xs: Vec<f64> = records.iter().map(|r| (1.0 / r.eps).ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| (r.pack as f64).ln().ln()).collect();
    fit_line(&xs, &ys).ok_or_else(|| Error::DegenerateFit("collinear abscissae".into()))
}
