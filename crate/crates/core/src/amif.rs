//! Aggregate mutual information in frequency (AMIF) between pairs of series,
//! and the system-wide similarity matrix built from it.
//!
//! For one pair of series the score is computed in four steps:
//!
//! 1. estimate the MI between every frequency-bin pairing of the two
//!    segmented spectra, filling an `n_f x n_f` matrix;
//! 2. keep the top `floor(q * n_f^2)` cells (minimum 1) and read off the
//!    distinct significant bins of each series;
//! 3. concatenate the per-bin sample matrices of those bins into one
//!    aggregate matrix per series;
//! 4. estimate a single MI between the two aggregates and normalize it by
//!    the mean selected-bin count so scores stay comparable across pairs
//!    whose aggregates differ in dimensionality.
//!
//! Applying this to every unordered column pair of a table yields a
//! [`SimilarityMatrix`] whose diagonal carries an infinity sentinel (a
//! continuous variable shares unbounded information with itself). Pair
//! scores are mirrored at construction, so [`refine`] (transpose averaging
//! plus the infinite diagonal) is a fixed point on internally built
//! matrices; it exists for matrices assembled from per-ordered-pair scores.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mi::{self, MiConfig, RealMatrix};
use crate::numfmt::{g17, parse_g17};
use crate::series::SeriesTable;
use crate::spectral::{freq_samples, segment_and_fft, SpectralTensor};

/// MI between every frequency-bin pairing of two series: entry `(i, j)` is
/// the MI between bin `i` of the first series and bin `j` of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqMIMatrix {
    n_f: usize,
    entries: Vec<f64>,
}

impl FreqMIMatrix {
    pub fn n_f(&self) -> usize {
        self.n_f
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n_f + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().sum::<f64>() / self.entries.len() as f64
    }
}

/// How the final aggregate MI is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the mean selected-bin count `(|freqs_a| + |freqs_b|) / 2`.
    MeanFrequencyCount,
    /// Raw estimator output.
    None,
}

/// Full AMIF parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AmifConfig {
    /// Segment / FFT length; also the number of frequency bins.
    pub n_f: usize,
    /// Fraction of the `n_f^2` bin pairings kept as significant, in (0, 1].
    pub q: f64,
    pub mi: MiConfig,
    pub normalization: Normalization,
}

impl Default for AmifConfig {
    fn default() -> Self {
        Self {
            n_f: 16,
            q: 0.5,
            mi: MiConfig::default(),
            normalization: Normalization::MeanFrequencyCount,
        }
    }
}

impl AmifConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_f < 2 {
            return Err(Error::InvalidConfig("n_f must be at least 2".into()));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::InvalidFraction(self.q));
        }
        self.mi.validate()
    }
}

/// Per-bin sample matrices and their Chebyshev distance matrices for one
/// series. Built once and shared across every pair the series appears in.
struct SeriesBins {
    samples: Vec<RealMatrix>,
    dists: Vec<Vec<f64>>,
    n_seg: usize,
}

impl SeriesBins {
    fn build(tensor: &SpectralTensor) -> Self {
        let mut samples = Vec::with_capacity(tensor.n_f());
        let mut dists = Vec::with_capacity(tensor.n_f());
        for k in 0..tensor.n_f() {
            let s = freq_samples(tensor, k).expect("bin index in range");
            dists.push(mi::chebyshev_matrix(&s));
            samples.push(s);
        }
        Self {
            samples,
            dists,
            n_seg: tensor.n_seg(),
        }
    }
}

fn freq_mi_from_bins(a: &SeriesBins, b: &SeriesBins, cfg: &MiConfig) -> FreqMIMatrix {
    let n_f = a.samples.len();
    let n = a.n_seg;
    let mut entries = Vec::with_capacity(n_f * n_f);
    for i in 0..n_f {
        for j in 0..n_f {
            entries.push(mi::ksg_core(&a.dists[i], &b.dists[j], n, cfg));
        }
    }
    FreqMIMatrix { n_f, entries }
}

/// Pairwise frequency-MI matrix between two spectral tensors of equal shape.
pub fn freq_mi_matrix(
    a: &SpectralTensor,
    b: &SpectralTensor,
    cfg: &MiConfig,
) -> Result<FreqMIMatrix> {
    cfg.validate()?;
    if a.n_seg() != b.n_seg() || a.n_f() != b.n_f() {
        return Err(Error::ShapeMismatch(a.n_seg(), a.n_f(), b.n_seg(), b.n_f()));
    }
    Ok(freq_mi_from_bins(
        &SeriesBins::build(a),
        &SeriesBins::build(b),
        cfg,
    ))
}

/// The `max(1, floor(q * n_f^2))` highest cells of `m`, ties broken by
/// descending value then ascending `(row, col)`.
pub fn top_q_cells(m: &FreqMIMatrix, q: f64) -> Result<Vec<(usize, usize)>> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidFraction(q));
    }
    let n_f = m.n_f;
    let total = n_f * n_f;
    let count = ((q * total as f64).floor() as usize).clamp(1, total);
    let mut cells: Vec<(usize, usize)> = (0..n_f)
        .flat_map(|i| (0..n_f).map(move |j| (i, j)))
        .collect();
    cells.sort_by(|&(r1, c1), &(r2, c2)| {
        m.get(r2, c2)
            .total_cmp(&m.get(r1, c1))
            .then(r1.cmp(&r2))
            .then(c1.cmp(&c2))
    });
    cells.truncate(count);
    Ok(cells)
}

/// Significant-bin sets implied by the top-q cells: sorted distinct row
/// indices for the first series, sorted distinct column indices for the
/// second.
pub fn select_top_q(m: &FreqMIMatrix, q: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    let cells = top_q_cells(m, q)?;
    let rows: BTreeSet<usize> = cells.iter().map(|&(r, _)| r).collect();
    let cols: BTreeSet<usize> = cells.iter().map(|&(_, c)| c).collect();
    Ok((rows.into_iter().collect(), cols.into_iter().collect()))
}

/// Horizontal concatenation of the per-bin sample matrices for `freqs`
/// (treated as a set, concatenated in ascending bin order), producing an
/// `n_seg x 2|freqs|` matrix.
pub fn aggregate(tensor: &SpectralTensor, freqs: &[usize]) -> Result<RealMatrix> {
    let set: BTreeSet<usize> = freqs.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::EmptyFrequencySet);
    }
    let mut blocks = Vec::with_capacity(set.len());
    for &k in &set {
        blocks.push(freq_samples(tensor, k)?);
    }
    let refs: Vec<&RealMatrix> = blocks.iter().collect();
    RealMatrix::hconcat(&refs)
}

fn aggregate_from_bins(bins: &SeriesBins, freqs: &[usize]) -> RealMatrix {
    let blocks: Vec<&RealMatrix> = freqs.iter().map(|&k| &bins.samples[k]).collect();
    RealMatrix::hconcat(&blocks).expect("bins share a row count")
}

fn score_from_bins(a: &SeriesBins, b: &SeriesBins, cfg: &AmifConfig) -> Result<f64> {
    let fm = freq_mi_from_bins(a, b, &cfg.mi);
    let (freqs_a, freqs_b) = select_top_q(&fm, cfg.q)?;
    let agg_a = aggregate_from_bins(a, &freqs_a);
    let agg_b = aggregate_from_bins(b, &freqs_b);
    let raw = mi::estimate_mi(&agg_a, &agg_b, &cfg.mi)?;
    Ok(match cfg.normalization {
        Normalization::MeanFrequencyCount => {
            raw / ((freqs_a.len() + freqs_b.len()) as f64 / 2.0)
        }
        Normalization::None => raw,
    })
}

/// AMIF score between two spectral tensors of equal shape.
pub fn amif_score(a: &SpectralTensor, b: &SpectralTensor, cfg: &AmifConfig) -> Result<f64> {
    cfg.validate()?;
    if a.n_seg() != b.n_seg() || a.n_f() != b.n_f() {
        return Err(Error::ShapeMismatch(a.n_seg(), a.n_f(), b.n_seg(), b.n_f()));
    }
    score_from_bins(&SeriesBins::build(a), &SeriesBins::build(b), cfg)
}

/// M x M pairwise scores with an infinite diagonal sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    names: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Validates squareness, the infinity diagonal, and finite nonnegative
    /// off-diagonal entries. Symmetry is not required here; see [`refine`].
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let m = names.len();
        if values.len() != m * m {
            return Err(Error::NotSquare {
                rows: if m == 0 { 0 } else { values.len() / m },
                cols: m,
            });
        }
        for i in 0..m {
            for j in 0..m {
                let v = values[i * m + j];
                if i == j {
                    if v != f64::INFINITY {
                        return Err(Error::InvalidEntry {
                            i,
                            j,
                            what: "diagonal must be the inf sentinel".into(),
                        });
                    }
                } else if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEntry {
                        i,
                        j,
                        what: format!("off-diagonal must be finite and >= 0, got {v}"),
                    });
                }
            }
        }
        Ok(Self { names, values })
    }

    /// Build from per-unordered-pair scores in `(i, j), i < j` lexicographic
    /// order; each score is mirrored into both triangles.
    pub fn from_pair_scores(names: Vec<String>, scores: &[f64]) -> Result<Self> {
        let m = names.len();
        if scores.len() != m * (m - 1) / 2 {
            return Err(Error::LengthMismatch(scores.len(), m * (m - 1) / 2));
        }
        let mut values = vec![f64::INFINITY; m * m];
        let mut it = scores.iter();
        for i in 0..m {
            for j in (i + 1)..m {
                let s = *it.next().expect("length checked");
                values[i * m + j] = s;
                values[j * m + i] = s;
            }
        }
        Self::new(names, values)
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn is_symmetric(&self) -> bool {
        let m = self.size();
        (0..m).all(|i| (0..m).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }

    /// Largest finite off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let m = self.size();
        let mut best = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    best = best.max(self.get(i, j));
                }
            }
        }
        best
    }

    /// CSV with a header row and column of series names; the diagonal is the
    /// literal token `inf`, everything else 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        matrix_to_csv(&self.names, &self.values)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (names, values) = matrix_from_csv(text)?;
        Self::new(names, values)
    }
}

/// Average a similarity matrix with its transpose and reset the diagonal to
/// the infinity sentinel. A fixed point on already-symmetric input.
pub fn refine(s: &SimilarityMatrix) -> SimilarityMatrix {
    let m = s.size();
    let mut values = vec![f64::INFINITY; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                values[i * m + j] = (s.get(i, j) + s.get(j, i)) / 2.0;
            }
        }
    }
    SimilarityMatrix {
        names: s.names.clone(),
        values,
    }
}

/// Pairwise AMIF similarity matrix over every column pair of a table.
///
/// Each unordered pair is scored once and mirrored, so the result is exactly
/// symmetric. Pairs are evaluated in parallel; the output is identical to
/// sequential evaluation in `(i, j), i < j` order.
pub fn similarity_matrix(table: &SeriesTable, cfg: &AmifConfig) -> Result<SimilarityMatrix> {
    cfg.validate()?;
    let m = table.width();
    let tensors: Vec<SpectralTensor> = table
        .columns()
        .iter()
        .map(|col| segment_and_fft(col, cfg.n_f))
        .collect::<Result<_>>()?;
    let bins: Vec<SeriesBins> = tensors.par_iter().map(SeriesBins::build).collect();

    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| score_from_bins(&bins[i], &bins[j], cfg))
        .collect::<Result<_>>()?;

    SimilarityMatrix::from_pair_scores(table.names().to_vec(), &scores)
}

pub(crate) fn matrix_to_csv(names: &[String], values: &[f64]) -> String {
    let m = names.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for i in 0..m {
        let mut row = vec![names[i].clone()];
        row.extend((0..m).map(|j| g17(values[i * m + j])));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

pub(crate) fn matrix_from_csv(text: &str) -> Result<(Vec<String>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect();
    let m = names.len();
    let mut values = Vec::with_capacity(m * m);
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() != m + 1 {
            return Err(Error::RaggedRow {
                row: rows + 1,
                found: rec.len(),
                expected: m + 1,
            });
        }
        if rows >= m {
            return Err(Error::NotSquare { rows: rows + 1, cols: m });
        }
        if rec[0] != names[rows] {
            return Err(Error::Csv(format!(
                "row label {:?} does not match column {:?}",
                &rec[0], names[rows]
            )));
        }
        for j in 0..m {
            let field = &rec[j + 1];
            let v = parse_g17(field)
                .ok_or_else(|| Error::Csv(format!("bad matrix entry {field:?}")))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::NotSquare { rows, cols: m });
    }
    Ok((names, values))
}
