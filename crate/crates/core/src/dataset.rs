//! Regression datasets and CSV ingestion.

use std::path::Path;

use crate::error::{Error, Result};

/// Feature matrix (row-major, `n × d`) plus response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    response: Vec<f64>,
    dim: usize,
    column_names: Option<Vec<String>>,
}

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for ResponseColumn {
    /// Interprets a purely numeric string as a column index.
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ResponseColumn::Index(i),
            Err(_) => ResponseColumn::Name(s.to_string()),
        }
    }
}

impl Dataset {
    pub fn new(features: Vec<f64>, response: Vec<f64>, dim: usize) -> Result<Self> {
        let n = response.len();
        if features.len() != n * dim {
            return Err(Error::Dimension {
                expected: n * dim,
                actual: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Row {
                row: pos / dim.max(1),
                message: "non-finite feature value".into(),
            });
        }
        if let Some(row) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::Row {
                row,
                message: "non-finite response value".into(),
            });
        }
        Ok(Dataset {
            features,
            response,
            dim,
            column_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.len() != response.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                actual: response.len(),
            });
        }
        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Row {
                    row: i,
                    message: format!("expected {dim} features, found {}", r.len()),
                });
            }
            features.extend_from_slice(r);
        }
        Dataset::new(features, response, dim)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: names.len(),
            });
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Copies the given rows, in order, into a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut response = Vec::with_capacity(rows.len());
        for &i in rows {
            features.extend_from_slice(self.row(i));
            response.push(self.response[i]);
        }
        Dataset {
            features,
            response,
            dim: self.dim,
            column_names: self.column_names.clone(),
        }
    }

    /// Per-column mean and standard deviation over `rows`. Columns with zero
    /// spread get a scale of 1.
    pub fn column_moments(&self, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; self.dim];
        for &i in rows {
            for (m, v) in mean.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.dim];
        for &i in rows {
            for ((s, v), m) in var.iter_mut().zip(self.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let denom = (rows.len().saturating_sub(1)).max(1) as f64;
        let sd = var
            .into_iter()
            .map(|s| {
                let sd = (s / denom).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        (mean, sd)
    }

    /// Applies `(x - center) / scale` column-wise to every row.
    pub fn standardized(&self, center: &[f64], scale: &[f64]) -> Dataset {
        let mut out = self.clone();
        for row in out.features.chunks_mut(self.dim.max(1)) {
            for ((v, c), s) in row.iter_mut().zip(center).zip(scale) {
                *v = (*v - c) / s;
            }
        }
        out
    }

    /// Reads a CSV with a header row. The response column is selected by
    /// name or index; every other column is a feature. Rows with empty or
    /// non-numeric cells are rejected with their 1-based data row number.
    pub fn from_csv_path(path: impl AsRef<Path>, response: &ResponseColumn) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Dataset::from_csv_reader(file, response)
    }

    pub fn from_csv_reader(reader: impl std::io::Read, response: &ResponseColumn) -> Result<Self> {
        let table = RawTable::read(reader)?;
        let target = table.resolve(response)?;
        let mut features = Vec::with_capacity(table.rows.len() * (table.header.len() - 1));
        let mut y = Vec::with_capacity(table.rows.len());
        for (r, cells) in table.rows.iter().enumerate() {
            for (c, cell) in cells.iter().enumerate() {
                let v = parse_cell(cell).ok_or_else(|| Error::Row {
                    row: r + 1,
                    message: format!(
                        "column `{}` has missing or non-numeric value {:?}",
                        table.header[c], cell
                    ),
                })?;
                if c == target {
                    y.push(v);
                } else {
                    features.push(v);
                }
            }
        }
        let names: Vec<String> = table
            .header
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != target)
            .map(|(_, n)| n.clone())
            .collect();
        Dataset::new(features, y, names.len())?.with_column_names(names)
    }
}

/// Reads a feature-only CSV (with header) whose columns are selected by
/// name to match `names`. Extra columns are ignored.
pub fn read_query_csv(path: impl AsRef<Path>, names: &[String]) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let table = RawTable::read(file)?;
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            table
                .header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Format(format!("query file lacks feature column `{n}`")))
        })
        .collect::<Result<_>>()?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(r, cells)| {
            cols.iter()
                .map(|&c| {
                    parse_cell(&cells[c]).ok_or_else(|| Error::Row {
                        row: r + 1,
                        message: format!(
                            "column `{}` has missing or non-numeric value {:?}",
                            table.header[c], cells[c]
                        ),
                    })
                })
                .collect()
        })
        .collect()
}

/// Parses a numeric cell; `None` for empty cells, `?`/`NA` markers and
/// anything non-numeric.
pub(crate) fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// A CSV table kept as strings, used before column filtering.
#[derive(Debug, Clone)]
pub(crate) struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read(reader: impl std::io::Read) -> Result<Self> {
        Self::read_with(reader, true)
    }

    pub fn read_with(reader: impl std::io::Read, has_header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .from_reader(reader);
        let mut header: Vec<String> = if has_header {
            rdr.headers()?.iter().map(|h| h.trim().to_string()).collect()
        } else {
            Vec::new()
        };
        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if !has_header && header.is_empty() {
                header = (0..rec.len()).map(|i| format!("col{i}")).collect();
            }
            if rec.len() != header.len() {
                return Err(Error::Row {
                    row: r + 1,
                    message: format!("expected {} cells, found {}", header.len(), rec.len()),
                });
            }
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if header.is_empty() {
            return Err(Error::Format("CSV has no columns".into()));
        }
        Ok(RawTable { header, rows })
    }

    pub fn resolve(&self, col: &ResponseColumn) -> Result<usize> {
        match col {
            ResponseColumn::Index(i) if *i < self.header.len() => Ok(*i),
            ResponseColumn::Index(i) => Err(Error::parameter(
                "response-col",
                format!("index {i} out of range for {} columns", self.header.len()),
            )),
            ResponseColumn::Name(n) => self
                .header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::parameter("response-col", format!("no column named `{n}` in header"))),
        }
    }
}
