//! Classical (Torgerson) multidimensional scaling.
//!
//! From a dissimilarity matrix `G` the Gram matrix is recovered by double
//! centering the squared dissimilarities, `B = -1/2 J (G o G) J` with
//! `J = I - (1/M) 11^T`, then eigendecomposed. Coordinates come from the top
//! `d` eigenpairs as `v_i * sqrt(lambda_i)`; non-positive eigenvalues among
//! the top `d` (expected whenever the input is not exactly Euclidean)
//! contribute zero columns and are counted in the result so callers can
//! surface a diagnostic. Eigenvector signs are fixed so the
//! largest-magnitude component of each axis is positive, which makes
//! repeated runs and downstream plots reproducible.
//!
//! The eigensolver is a cyclic Jacobi iteration, converging when the
//! off-diagonal norm falls below 1e-12 relative to the input scale. The
//! matrices here are small (tens of series), so its cubic cost is
//! irrelevant and its accuracy and determinism are worth having.

use crate::error::{Error, Result};
use crate::numfmt::{g17, parse_g17};
use crate::transform::DissimilarityMatrix;

const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// MDS coordinates plus the full eigenvalue spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    names: Vec<String>,
    /// Row-major M x d coordinates.
    coords: Vec<f64>,
    d: usize,
    /// All M eigenvalues of the double-centered matrix, descending.
    eigenvalues: Vec<f64>,
    /// Top-d eigenpairs with lambda <= 0 that were zeroed out.
    zeroed_axes: usize,
}

impl Embedding {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn points(&self) -> usize {
        self.names.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coords_row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// Coordinates as one row per point, for clustering.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.points()).map(|i| self.coords_row(i).to_vec()).collect()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn zeroed_axes(&self) -> usize {
        self.zeroed_axes
    }

    /// Euclidean distance between embedded points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.coords_row(i)
            .iter()
            .zip(self.coords_row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// CSV with header `name,dim1..dimd[,cluster]`.
    pub fn to_csv_string(&self, clusters: Option<&[i64]>) -> String {
        embedding_to_csv(&self.names, &self.rows(), clusters)
    }
}

/// Serialize embedding parts as `name,dim1..dimd[,cluster]` CSV.
pub fn embedding_to_csv(names: &[String], coords: &[Vec<f64>], clusters: Option<&[i64]>) -> String {
    let d = coords.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["name".to_string()];
    header.extend((1..=d).map(|c| format!("dim{c}")));
    if clusters.is_some() {
        header.push("cluster".to_string());
    }
    w.write_record(&header).expect("in-memory write");
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(coords[i].iter().map(|&v| g17(v)));
        if let Some(labels) = clusters {
            row.push(labels[i].to_string());
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

/// Parsed embedding CSV: names, coordinate rows, and the optional cluster
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCsv {
    pub names: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub clusters: Option<Vec<i64>>,
}

pub fn embedding_from_csv(text: &str) -> Result<EmbeddingCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("name") {
        return Err(Error::Csv("embedding csv must start with a name column".into()));
    }
    let has_cluster = header.last().map(String::as_str) == Some("cluster");
    let d = header.len() - 1 - usize::from(has_cluster);
    if d == 0 {
        return Err(Error::Csv("embedding csv has no coordinate columns".into()));
    }

    let mut names = Vec::new();
    let mut coords = Vec::new();
    let mut clusters = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                row: names.len() + 1,
                found: rec.len(),
                expected: header.len(),
            });
        }
        names.push(rec[0].to_string());
        let mut row = Vec::with_capacity(d);
        for c in 0..d {
            let field = &rec[c + 1];
            row.push(
                parse_g17(field)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Csv(format!("bad coordinate {field:?}")))?,
            );
        }
        coords.push(row);
        if has_cluster {
            let field = &rec[d + 1];
            clusters.push(
                field
                    .parse::<i64>()
                    .map_err(|_| Error::Csv(format!("bad cluster label {field:?}")))?,
            );
        }
    }
    Ok(EmbeddingCsv {
        names,
        coords,
        clusters: has_cluster.then_some(clusters),
    })
}

/// Classical MDS of `g` into `d` dimensions, `1 <= d <= M - 1`.
pub fn classical_mds(g: &DissimilarityMatrix, d: usize) -> Result<Embedding> {
    let m = g.size();
    if d < 1 || d >= m {
        return Err(Error::DimensionOutOfRange { d, m });
    }

    let b = double_center(g);
    let (eigenvalues, eigenvectors, order) = jacobi_eigen_sorted(b, m)?;

    let mut coords = vec![0.0; m * d];
    let mut zeroed_axes = 0usize;
    for c in 0..d {
        let lambda = eigenvalues[c];
        if lambda <= 0.0 {
            zeroed_axes += 1;
            continue;
        }
        let col = order[c];
        // Fix the sign so the largest-magnitude component is positive.
        let mut arg = 0usize;
        let mut best = 0.0f64;
        for r in 0..m {
            let a = eigenvectors[r * m + col].abs();
            if a > best {
                best = a;
                arg = r;
            }
        }
        let flip = if eigenvectors[arg * m + col] < 0.0 { -1.0 } else { 1.0 };
        let scale = lambda.sqrt() * flip;
        for r in 0..m {
            coords[r * d + c] = eigenvectors[r * m + col] * scale;
        }
    }

    Ok(Embedding {
        names: g.names().to_vec(),
        coords,
        d,
        eigenvalues,
        zeroed_axes,
    })
}

/// Residual stress of an embedding against the dissimilarities it came
/// from: `sqrt(sum (g_ij - d_ij)^2 / sum g_ij^2)` over `i < j`, zero for a
/// perfect or all-zero input.
pub fn stress(g: &DissimilarityMatrix, e: &Embedding) -> Result<f64> {
    let m = g.size();
    if e.points() != m {
        return Err(Error::LengthMismatch(m, e.points()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let gij = g.get(i, j);
            let dij = e.distance(i, j);
            num += (gij - dij) * (gij - dij);
            den += gij * gij;
        }
    }
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((num / den).sqrt())
}

/// `B = -1/2 J (G o G) J`, built entrywise as
/// `b_ij = -1/2 (g_ij^2 - rowmean_i - rowmean_j + grandmean)` and mirrored
/// so the result is exactly symmetric.
fn double_center(g: &DissimilarityMatrix) -> Vec<f64> {
    let m = g.size();
    let mut sq = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let v = g.get(i, j);
            sq[i * m + j] = v * v;
        }
    }
    let mut row_mean = vec![0.0; m];
    for i in 0..m {
        row_mean[i] = sq[i * m..(i + 1) * m].iter().sum::<f64>() / m as f64;
    }
    let grand = row_mean.iter().sum::<f64>() / m as f64;
    let mut b = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = -0.5 * (sq[i * m + j] - row_mean[i] - row_mean[j] + grand);
            b[i * m + j] = v;
            b[j * m + i] = v;
        }
    }
    b
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues sorted descending, the eigenvector matrix (columns
/// are eigenvectors, in original Jacobi order), and the column permutation
/// matching the sorted eigenvalues.
fn jacobi_eigen_sorted(mut a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * frob;

    let mut converged = frob == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        a[r * n + p] = c * arp - s * arq;
                        a[p * n + r] = a[r * n + p];
                        a[r * n + q] = s * arp + c * arq;
                        a[q * n + r] = a[r * n + q];
                    }
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        let off = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        converged = off <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    Ok((eigenvalues, v, order))
}
