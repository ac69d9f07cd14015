//! Density-based clustering of embedded points, plus the adjusted Rand
//! index for scoring partition agreement.
//!
//! Standard DBSCAN over the Euclidean metric with a closed neighborhood
//! ball (`distance <= eps`, compared as squared distances on both sides). A
//! point is core when at least `min_pts` points, itself included, fall in
//! its ball. The outer scan and neighbor expansion proceed in ascending
//! point index and cluster ids are assigned in discovery order, so the
//! labeling is fully deterministic. With `min_pts = 1` every point is core
//! and the output is a noise-free partition.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Reserved label for noise points.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct DbscanConfig {
    /// Neighborhood radius (closed ball).
    pub eps: f64,
    /// Minimum ball population, self included, for a core point.
    pub min_pts: usize,
}

impl DbscanConfig {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        let cfg = Self { eps, min_pts };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig("eps must be positive and finite".into()));
        }
        if self.min_pts < 1 {
            return Err(Error::InvalidConfig("min_pts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-point cluster labels: ids form a contiguous range `0..C`, noise is
/// [`NOISE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<i64>,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| (m + 1) as usize)
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (ascending, including `i` itself) within the closed eps-ball.
fn region_query(points: &[Vec<f64>], i: usize, eps_sq: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&j| squared_distance(&points[i], &points[j]) <= eps_sq)
        .collect()
}

/// DBSCAN over row-vector points.
pub fn dbscan(points: &[Vec<f64>], cfg: &DbscanConfig) -> Result<ClusterAssignment> {
    cfg.validate()?;
    let n = points.len();
    if n == 0 {
        return Ok(ClusterAssignment { labels: Vec::new() });
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::LengthMismatch(dim, p.len()));
        }
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("point {i}")));
        }
    }

    let eps_sq = cfg.eps * cfg.eps;
    let mut labels: Vec<Option<i64>> = vec![None; n];
    let mut next_cluster = 0i64;

    for i in 0..n {
        if labels[i].is_some() {
            continue;
        }
        let neighborhood = region_query(points, i, eps_sq);
        if neighborhood.len() < cfg.min_pts {
            labels[i] = Some(NOISE);
            continue;
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = Some(cluster);
        let mut queue: VecDeque<usize> = neighborhood.into();
        while let Some(j) = queue.pop_front() {
            match labels[j] {
                Some(NOISE) => {
                    // Border point: reachable from a core point but not core
                    // itself. Claimed by the first cluster to reach it.
                    labels[j] = Some(cluster);
                }
                Some(_) => {}
                None => {
                    labels[j] = Some(cluster);
                    let reach = region_query(points, j, eps_sq);
                    if reach.len() >= cfg.min_pts {
                        queue.extend(reach);
                    }
                }
            }
        }
    }

    Ok(ClusterAssignment {
        labels: labels.into_iter().map(|l| l.expect("every point labeled")).collect(),
    })
}

/// Adjusted Rand index between two labelings of the same points.
///
/// 1 means identical partitions (up to label renaming), 0 chance-level
/// agreement. Both trivial-partition corner cases (all singletons vs all
/// singletons, one block vs one block) return 1.
pub fn adjusted_rand_index(a: &[i64], b: &[i64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as u64;

    use std::collections::HashMap;
    let mut joint: HashMap<(i64, i64), u64> = HashMap::new();
    let mut rows: HashMap<i64, u64> = HashMap::new();
    let mut cols: HashMap<i64, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }

    fn choose2(x: u64) -> u64 {
        x * x.saturating_sub(1) / 2
    }

    let sum_joint: u64 = joint.values().map(|&c| choose2(c)).sum();
    let sum_rows: u64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: u64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    if total == 0 {
        return Ok(1.0);
    }

    let expected = sum_rows as f64 * sum_cols as f64 / total as f64;
    let max_index = (sum_rows + sum_cols) as f64 / 2.0;
    let denom = max_index - expected;
    if denom == 0.0 {
        // Both partitions trivial in the same way.
        return Ok(1.0);
    }
    Ok((sum_joint as f64 - expected) / denom)
}
