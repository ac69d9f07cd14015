//! Kraskov-Stogbauer-Grassberger (KSG) k-nearest-neighbor mutual information
//! estimation between two real sample matrices with a shared row count.
//!
//! Variant 1 of the estimator: with `eps_i` the Chebyshev distance from
//! sample `i` to its k-th nearest neighbor in the concatenated joint space,
//! and `n_x(i)`, `n_y(i)` the number of samples strictly within `eps_i` in
//! each marginal space,
//!
//! ```text
//! MI = psi(k) + psi(n) - mean_i[ psi(n_x(i) + 1) + psi(n_y(i) + 1) ]
//! ```
//!
//! clamped below at zero. Neighbor search is exact brute force; the joint
//! Chebyshev distance is the max of the marginal Chebyshev distances, so
//! swapping the arguments yields a bit-identical result. Duplicate points
//! are handled by flooring `eps_i` at a configurable positive distance
//! rather than jittering the data, which keeps the estimate deterministic.

use crate::error::{Error, Result};

/// Dense row-major matrix of finite reals: `rows` samples by `cols` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    /// Requires at least 2 rows, at least 1 column, and finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::TooFewSamples(rows));
        }
        if cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteValue("matrix".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Concatenate blocks side by side; all blocks must share a row count.
    pub fn hconcat(blocks: &[&RealMatrix]) -> Result<RealMatrix> {
        let rows = blocks
            .first()
            .ok_or(Error::EmptyFrequencySet)
            .map(|b| b.rows())?;
        for b in blocks {
            if b.rows() != rows {
                return Err(Error::RowCountMismatch(rows, b.rows()));
            }
        }
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(r));
            }
        }
        RealMatrix::new(rows, cols, data)
    }
}

/// Estimator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MiConfig {
    /// Neighbor count; clamped to `n - 1` at estimation time.
    pub k: usize,
    /// Lower floor applied to every k-th-neighbor distance so exact
    /// duplicates cannot produce a zero neighborhood.
    pub distance_floor: f64,
}

impl Default for MiConfig {
    fn default() -> Self {
        Self {
            k: 3,
            distance_floor: 1e-12,
        }
    }
}

impl MiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("neighbor count k must be >= 1".into()));
        }
        if !(self.distance_floor > 0.0 && self.distance_floor.is_finite()) {
            return Err(Error::InvalidConfig(
                "distance floor must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// KSG variant-1 mutual information between `x` and `y` in nats.
///
/// The two matrices must have the same number of rows (joint samples).
/// The result is deterministic, symmetric in its arguments, and >= 0.
pub fn estimate_mi(x: &RealMatrix, y: &RealMatrix, cfg: &MiConfig) -> Result<f64> {
    cfg.validate()?;
    if x.rows() != y.rows() {
        return Err(Error::RowCountMismatch(x.rows(), y.rows()));
    }
    let n = x.rows();
    let dx = chebyshev_matrix(x);
    let dy = chebyshev_matrix(y);
    Ok(ksg_core(&dx, &dy, n, cfg))
}

/// Pairwise Chebyshev (max-coordinate) distances, row-major `n x n`.
pub(crate) fn chebyshev_matrix(m: &RealMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let ri = m.row(i);
        for j in (i + 1)..n {
            let rj = m.row(j);
            let mut dist = 0.0f64;
            for (a, b) in ri.iter().zip(rj) {
                dist = dist.max((a - b).abs());
            }
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    }
    d
}

/// Estimator core over precomputed marginal distance matrices.
///
/// `dx` and `dy` are `n x n` row-major Chebyshev distance matrices of the two
/// marginals; the joint distance is their elementwise max. Callers must pass
/// a validated config.
pub(crate) fn ksg_core(dx: &[f64], dy: &[f64], n: usize, cfg: &MiConfig) -> f64 {
    debug_assert_eq!(dx.len(), n * n);
    debug_assert_eq!(dy.len(), n * n);
    let k = cfg.k.min(n - 1);
    let psi = DigammaTable::up_to(n);
    let mut kbuf = vec![f64::INFINITY; k];
    let mut acc = 0.0;
    for i in 0..n {
        let rx = &dx[i * n..(i + 1) * n];
        let ry = &dy[i * n..(i + 1) * n];
        let eps = kth_joint_distance(rx, ry, i, &mut kbuf).max(cfg.distance_floor);
        let nx = count_strictly_within(rx, eps);
        let ny = count_strictly_within(ry, eps);
        acc += psi.get(nx + 1) + psi.get(ny + 1);
    }
    let mi = psi.get(k) + psi.get(n) - acc / n as f64;
    mi.max(0.0)
}

/// k-th smallest of `max(rx[j], ry[j])` over `j != skip`; `buf` has length k.
fn kth_joint_distance(rx: &[f64], ry: &[f64], skip: usize, buf: &mut [f64]) -> f64 {
    buf.fill(f64::INFINITY);
    let last = buf.len() - 1;
    for j in 0..rx.len() {
        if j == skip {
            continue;
        }
        let d = rx[j].max(ry[j]);
        if d < buf[last] {
            let mut pos = last;
            while pos > 0 && buf[pos - 1] > d {
                buf[pos] = buf[pos - 1];
                pos -= 1;
            }
            buf[pos] = d;
        }
    }
    buf[last]
}

/// Number of samples other than the reference itself at distance < eps.
/// The self-distance is zero and eps is positive, so the self hit is
/// subtracted unconditionally.
fn count_strictly_within(row: &[f64], eps: f64) -> usize {
    let mut count = 0usize;
    for &d in row {
        count += (d < eps) as usize;
    }
    count - 1
}

/// Digamma values at integer arguments 1..=max, indexed by argument.
struct DigammaTable {
    values: Vec<f64>,
}

impl DigammaTable {
    fn up_to(max: usize) -> Self {
        let values = (1..=max).map(|m| digamma(m as f64)).collect();
        Self { values }
    }

    fn get(&self, arg: usize) -> f64 {
        self.values[arg - 1]
    }
}

/// Digamma function for positive arguments.
///
/// Shifts the argument above 10 with `psi(x) = psi(x + 1) - 1/x`, then
/// applies the asymptotic series
/// `psi(x) ~ ln x - 1/(2x) - 1/(12x^2) + 1/(120x^4) - ...`,
/// giving absolute error below 1e-12 for x >= 1.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "digamma requires a positive argument");
    let mut shift = 0.0;
    let mut x = x;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail through the x^-12 term.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    shift + x.ln() - 0.5 * inv - series
}
