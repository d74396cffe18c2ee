//! Loader for the UCI Communities and Crime table.
//!
//! Accepts either a CSV with a header row, or the raw headerless
//! `communities.data` file (128 columns, `?` for missing values). Identifier
//! and categorical columns are dropped, then every column with a missing
//! cell is dropped. On the original file this leaves 1994 rows and 99
//! features.

use std::path::Path;

use crate::dataset::{parse_cell, Dataset, RawTable};
use crate::error::{Error, Result};

/// Response column of the UCI file.
pub const CRIME_RESPONSE: &str = "ViolentCrimesPerPop";

/// Non-predictive columns of the UCI file (by header name).
pub const CRIME_CATEGORICAL: [&str; 5] = ["state", "county", "community", "communityname", "fold"];

/// Column count of the raw headerless UCI file.
pub const CRIME_RAW_COLUMNS: usize = 128;

/// Feature count after preprocessing.
pub const CRIME_FEATURES: usize = 99;

#[derive(Debug, Clone)]
pub struct CrimeOptions {
    pub response: String,
    pub drop_columns: Vec<String>,
    /// Require exactly [`CRIME_FEATURES`] features after filtering.
    pub strict: bool,
}

impl Default for CrimeOptions {
    fn default() -> Self {
        CrimeOptions {
            response: CRIME_RESPONSE.to_string(),
            drop_columns: CRIME_CATEGORICAL.iter().map(|s| s.to_string()).collect(),
            strict: false,
        }
    }
}

pub fn load_crime_dataset(path: impl AsRef<Path>, opts: &CrimeOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_crime_reader(bytes.as_slice(), opts)
}

pub fn load_crime_reader(bytes: &[u8], opts: &CrimeOptions) -> Result<Dataset> {
    let headerless = looks_headerless(bytes);
    let table = RawTable::read_with(bytes, !headerless)?;
    let (response, dropped): (usize, Vec<usize>) = if headerless {
        if table.header.len() != CRIME_RAW_COLUMNS {
            return Err(Error::Format(format!(
                "headerless crime file must have {CRIME_RAW_COLUMNS} columns, found {}",
                table.header.len()
            )));
        }
        (CRIME_RAW_COLUMNS - 1, (0..CRIME_CATEGORICAL.len()).collect())
    } else {
        let response = table
            .header
            .iter()
            .position(|h| *h == opts.response)
            .ok_or_else(|| Error::parameter("response-col", format!("no column named `{}`", opts.response)))?;
        let dropped = table
            .header
            .iter()
            .enumerate()
            .filter(|(_, h)| opts.drop_columns.iter().any(|d| d == *h))
            .map(|(i, _)| i)
            .collect();
        (response, dropped)
    };

    let keep: Vec<usize> = (0..table.header.len())
        .filter(|&c| c != response && !dropped.contains(&c))
        .filter(|&c| table.rows.iter().all(|r| parse_cell(&r[c]).is_some()))
        .collect();
    if opts.strict && keep.len() != CRIME_FEATURES {
        return Err(Error::Dimension {
            expected: CRIME_FEATURES,
            actual: keep.len(),
        });
    }

    let mut features = Vec::with_capacity(table.rows.len() * keep.len());
    let mut y = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        y.push(parse_cell(&row[response]).ok_or_else(|| Error::Row {
            row: r + 1,
            message: format!("missing response value {:?}", row[response]),
        })?);
        features.extend(keep.iter().map(|&c| parse_cell(&row[c]).unwrap_or(f64::NAN)));
    }
    let names = keep.iter().map(|&c| table.header[c].clone()).collect();
    Dataset::new(features, y, keep.len())?.with_column_names(names)
}

/// True when the first line parses mostly as numbers or missing markers.
fn looks_headerless(bytes: &[u8]) -> bool {
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let line = String::from_utf8_lossy(first);
    let cells: Vec<&str> = line.trim_end().split(',').collect();
    let numeric = cells
        .iter()
        .filter(|c| parse_cell(c).is_some() || c.trim() == "?")
        .count();
    numeric * 2 > cells.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_categorical_and_missing_columns() {
        let csv = "state,communityname,a,b,c,ViolentCrimesPerPop\n\
                   1,Foo,0.1,0.2,?,0.3\n\
                   2,Bar,0.4,0.5,0.6,0.7\n";
        let ds = load_crime_reader(csv.as_bytes(), &CrimeOptions::default()).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.column_names().unwrap(), &["a", "b"]);
        assert_eq!(ds.response(), &[0.3, 0.7]);
        assert_eq!(ds.row(1), &[0.4, 0.5]);
    }

    #[test]
    fn strict_mode_checks_dimension() {
        let csv = "a,ViolentCrimesPerPop\n1,2\n";
        let opts = CrimeOptions {
            strict: true,
            ..CrimeOptions::default()
        };
        let err = load_crime_reader(csv.as_bytes(), &opts).unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 99,
                actual: 1
            }
        ));
    }

    #[test]
    fn raw_uci_layout() {
        // 128 columns: 5 identifiers, 122 predictors (two with missing
        // values), response last
        let mut lines = Vec::new();
        for r in 0..3 {
            let mut cells = vec!["8".to_string(), "?".into(), "?".into(), "Town".into(), "1".into()];
            for c in 0..122 {
                let missing = (c == 10 && r == 1) || c == 50;
                cells.push(if missing {
                    "?".into()
                } else {
                    format!("0.{}", (r + c) % 10)
                });
            }
            cells.push(format!("0.{r}5"));
            lines.push(cells.join(","));
        }
        let text = lines.join("\n");
        let ds = load_crime_reader(text.as_bytes(), &CrimeOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 120);
        assert_eq!(ds.response(), &[0.05, 0.15, 0.25]);
    }

    #[test]
    fn missing_response_is_an_error() {
        let csv = "a,ViolentCrimesPerPop\n1,2\n3,?\n";
        let err = load_crime_reader(csv.as_bytes(), &CrimeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }));
    }
}
