//! Tables of named, equal-length time series: CSV ingestion and per-column
//! standardization.
//!
//! A [`SeriesTable`] holds M real-valued columns of equal length T. Columns
//! are the unit of analysis everywhere else in the crate; rows are time
//! steps. Ingestion is strict: a column containing any empty or non-numeric
//! cell is either excluded (when `drop_incomplete` is set) or aborts the
//! load.

use std::io::Read;
use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::numfmt::g17;

/// Named, equal-length, finite real-valued columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    sample_interval: Option<Duration>,
}

impl SeriesTable {
    /// Build a table from parallel name/column vectors.
    ///
    /// Requires at least 2 columns, unique nonempty names, equal column
    /// lengths of at least 1, and finite entries throughout.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch(names.len(), columns.len()));
        }
        if names.len() < 2 {
            return Err(Error::TooFewColumns(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::EmptyName(i));
            }
            if names[..i].contains(name) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        let len = columns[0].len();
        if len == 0 {
            return Err(Error::NoDataRows);
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != len {
                return Err(Error::UnequalColumnLength(name.clone()));
            }
            if !col.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteValue(name.clone()));
            }
        }
        Ok(Self {
            names,
            columns,
            sample_interval: None,
        })
    }

    /// Number of rows (time steps) T.
    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of columns (series) M.
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Informational sampling-interval metadata; never affects computation.
    pub fn sample_interval(&self) -> Option<Duration> {
        self.sample_interval
    }

    pub fn set_sample_interval(&mut self, interval: Option<Duration>) {
        self.sample_interval = interval;
    }

    /// Standardize every column to zero mean and unit population variance
    /// (divide by T, not T-1).
    pub fn standardize(&self) -> Result<SeriesTable> {
        let mut out = Vec::with_capacity(self.width());
        for (name, col) in self.names.iter().zip(&self.columns) {
            out.push(standardize_column(col).ok_or_else(|| Error::ZeroVariance(name.clone()))?);
        }
        let mut table = SeriesTable::new(self.names.clone(), out)?;
        table.sample_interval = self.sample_interval;
        Ok(table)
    }

    /// Serialize as CSV: header of names, then one row per time step, every
    /// value printed with 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.names).expect("in-memory write");
        for t in 0..self.len() {
            let row: Vec<String> = self.columns.iter().map(|c| g17(c[t])).collect();
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }
}

fn standardize_column(col: &[f64]) -> Option<Vec<f64>> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return None;
    }
    let sd = var.sqrt();
    Some(col.iter().map(|v| (v - mean) / sd).collect())
}

/// Ground-truth or predicted integer labels, one per column of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    pub labels: Vec<i64>,
}

impl LabelVector {
    pub fn new(labels: Vec<i64>) -> Self {
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Serialize labels as a `name,label` CSV alongside their column names.
pub fn labels_to_csv(names: &[String], labels: &LabelVector) -> Result<String> {
    if names.len() != labels.len() {
        return Err(Error::LengthMismatch(names.len(), labels.len()));
    }
    let mut out = String::from("name,label\n");
    for (name, label) in names.iter().zip(&labels.labels) {
        out.push_str(&format!("{name},{label}\n"));
    }
    Ok(out)
}

/// Parse a `name,label` CSV produced by [`labels_to_csv`].
pub fn labels_from_csv(text: &str) -> Result<(Vec<String>, LabelVector)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::RaggedRow {
                row: names.len() + 1,
                found: rec.len(),
                expected: 2,
            });
        }
        names.push(rec[0].to_string());
        labels.push(
            rec[1]
                .parse::<i64>()
                .map_err(|_| Error::Csv(format!("bad label {:?}", &rec[1])))?,
        );
    }
    Ok((names, LabelVector::new(labels)))
}

/// A column dropped during ingestion, with the first offending cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnExclusion {
    pub name: String,
    pub reason: String,
}

/// Result of a CSV load: the usable table plus any excluded columns.
#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub table: SeriesTable,
    pub excluded: Vec<ColumnExclusion>,
}

/// Load a series table from a CSV file.
///
/// The first row must be a header of column names. Body cells must parse as
/// finite numbers. With `drop_incomplete` set, columns containing any empty
/// or unparsable cell are excluded and reported; otherwise the first such
/// cell aborts the load. Surviving columns keep their original order.
pub fn load_csv(path: impl AsRef<Path>, drop_incomplete: bool) -> Result<CsvLoad> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(file, drop_incomplete)
}

/// Same as [`load_csv`] but reading from any `Read` source.
pub fn parse_csv<R: Read>(reader: R, drop_incomplete: bool) -> Result<CsvLoad> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let m = names.len();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); m];
    // First bad cell per column; the column is dropped (or the load fails)
    // but parsing continues so every exclusion is reported in one pass.
    let mut bad: Vec<Option<String>> = vec![None; m];
    let mut rows = 0usize;

    for rec in rdr.records() {
        let rec = rec.map_err(|e| convert_record_error(e, rows + 1))?;
        rows += 1;
        for (c, field) in rec.iter().enumerate() {
            let value = if field.is_empty() {
                Err(format!("empty cell at row {rows}"))
            } else {
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(format!("non-finite value at row {rows}")),
                    Err(_) => Err(format!("non-numeric value {field:?} at row {rows}")),
                }
            };
            match value {
                Ok(v) => columns[c].push(v),
                Err(reason) => {
                    if bad[c].is_none() {
                        bad[c] = Some(reason);
                    }
                }
            }
        }
    }

    if rows == 0 {
        return Err(Error::NoDataRows);
    }

    let mut excluded = Vec::new();
    let mut kept_names = Vec::new();
    let mut kept_columns = Vec::new();
    for ((name, col), bad) in names.into_iter().zip(columns).zip(bad) {
        match bad {
            Some(reason) if drop_incomplete => excluded.push(ColumnExclusion { name, reason }),
            Some(reason) => return Err(Error::IncompleteColumn {
                column: name,
                reason,
            }),
            None => {
                kept_names.push(name);
                kept_columns.push(col);
            }
        }
    }

    if kept_names.len() < 2 {
        return Err(Error::TooFewColumns(kept_names.len()));
    }
    let table = SeriesTable::new(kept_names, kept_columns)?;
    Ok(CsvLoad { table, excluded })
}

fn convert_record_error(e: csv::Error, row: usize) -> Error {
    if let csv::ErrorKind::UnequalLengths {
        expected_len, len, ..
    } = e.kind()
    {
        Error::RaggedRow {
            row,
            found: *len as usize,
            expected: *expected_len as usize,
        }
    } else {
        Error::Csv(e.to_string())
    }
}
