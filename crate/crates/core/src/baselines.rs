//! Linear comparison metrics: maximum absolute cross-correlation, maximum
//! absolute correlation coefficient, and plain Euclidean distance.
//!
//! These follow the same matrix path as the frequency-MI score so the two
//! families can be compared on identical downstream footing. The
//! cross-correlation is the zero-padded (biased) estimate normalized by the
//! global population standard deviations, which bounds it by 1.

use rayon::prelude::*;

use crate::amif::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::series::SeriesTable;
use crate::transform::DissimilarityMatrix;

/// Which linear similarity fills the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMetric {
    /// Max over lags of the absolute normalized cross-correlation.
    Macc,
    /// Absolute lag-0 Pearson correlation coefficient.
    Maccoeff,
}

struct CenteredSeries {
    values: Vec<f64>,
    sd: f64,
}

fn center(series: &[f64], label: &str) -> Result<CenteredSeries> {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let values: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var = values.iter().map(|v| v * v).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::ZeroVariance(label.to_string()));
    }
    Ok(CenteredSeries {
        values,
        sd: var.sqrt(),
    })
}

/// Maximum over `lag in [-max_lag, max_lag]` of `|r(lag)|`, where
/// `r(lag) = sum_t x~[t] y~[t + lag] / (T sd_x sd_y)` and out-of-range
/// products contribute zero. Both series must have equal length and
/// nonzero variance; `max_lag` must be below the length.
pub fn macc(x: &[f64], y: &[f64], max_lag: usize) -> Result<f64> {
    macc_peak(x, y, max_lag).map(|(value, _)| value)
}

/// Like [`macc`] but also reports the lag attaining the maximum (the first
/// such lag scanning from `-max_lag` upward).
pub fn macc_peak(x: &[f64], y: &[f64], max_lag: usize) -> Result<(f64, i64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let t = x.len();
    if max_lag >= t {
        return Err(Error::LagOutOfRange {
            lag: max_lag,
            len: t,
        });
    }
    let cx = center(x, "x")?;
    let cy = center(y, "y")?;
    let denom = t as f64 * cx.sd * cy.sd;

    let mut best = f64::NEG_INFINITY;
    let mut best_lag = 0i64;
    let l = max_lag as i64;
    for lag in -l..=l {
        let mut sum = 0.0;
        // Valid overlap: 0 <= t and 0 <= t + lag < T.
        let (lo, hi) = if lag >= 0 {
            (0usize, t - lag as usize)
        } else {
            ((-lag) as usize, t)
        };
        for i in lo..hi {
            sum += cx.values[i] * cy.values[(i as i64 + lag) as usize];
        }
        let r = (sum / denom).abs();
        if r > best {
            best = r;
            best_lag = lag;
        }
    }
    Ok((best.min(1.0), best_lag))
}

/// Absolute lag-0 Pearson correlation coefficient.
pub fn maccoeff(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let cx = center(x, "x")?;
    let cy = center(y, "y")?;
    let cov = cx
        .values
        .iter()
        .zip(&cy.values)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / x.len() as f64;
    Ok((cov / (cx.sd * cy.sd)).abs().min(1.0))
}

/// Pairwise baseline similarity matrix with the usual infinite diagonal.
/// `max_lag` applies to [`BaselineMetric::Macc`] only.
pub fn baseline_similarity_matrix(
    table: &SeriesTable,
    metric: BaselineMetric,
    max_lag: usize,
) -> Result<SimilarityMatrix> {
    // Surface zero-variance columns by name before the pair loop.
    for (name, col) in table.names().iter().zip(table.columns()) {
        center(col, name)?;
    }
    let m = table.width();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| match metric {
            BaselineMetric::Macc => macc(table.column(i), table.column(j), max_lag),
            BaselineMetric::Maccoeff => maccoeff(table.column(i), table.column(j)),
        })
        .collect::<Result<_>>()?;
    SimilarityMatrix::from_pair_scores(table.names().to_vec(), &scores)
}

/// Pairwise Euclidean distances between columns, as a ready-made
/// dissimilarity matrix (zero diagonal, no transform step).
pub fn euclidean_dissim(table: &SeriesTable) -> DissimilarityMatrix {
    let m = table.width();
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = table
                .column(i)
                .iter()
                .zip(table.column(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            values[i * m + j] = d;
            values[j * m + i] = d;
        }
    }
    DissimilarityMatrix::new(table.names().to_vec(), values).expect("construction is valid")
}
