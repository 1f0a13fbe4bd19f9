//! Bundled benchmark datasets and CSV ingestion.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{IpodError, Result};
use crate::regress::RegressionProblem;

const HBK_CSV: &str = include_str!("../data/hbk.csv");
const TELEF_CSV: &str = include_str!("../data/telef.csv");
const STARS_CSV: &str = include_str!("../data/stars.csv");

/// Predictors and response read from a table.
#[derive(Debug, Clone, Serialize)]
pub struct Dataset {
    pub name: String,
    pub x_names: Vec<String>,
    pub y_name: String,
    #[serde(skip)]
    pub x: DMatrix<f64>,
    #[serde(skip)]
    pub y: DVector<f64>,
    pub note: String,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn problem(&self, intercept: bool) -> Result<RegressionProblem> {
        RegressionProblem::new(self.x.clone(), self.y.clone(), intercept)
    }
}

/// Which column holds the response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum YColumn {
    #[default]
    Last,
    Name(String),
    /// 0-based column position.
    Index(usize),
}

impl std::str::FromStr for YColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => YColumn::Index(i),
            Err(_) if s == "last" => YColumn::Last,
            Err(_) => YColumn::Name(s.to_string()),
        })
    }
}

/// Parses a headed numeric CSV table. Errors name the 1-based data row
/// (header excluded) and 1-based column of the offending cell.
pub fn ingest_csv<R: Read>(reader: R, y_column: &YColumn, name: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 2 {
        return Err(IpodError::Data(format!(
            "need at least two columns, found {}",
            headers.len()
        )));
    }
    let y_idx = match y_column {
        YColumn::Last => headers.len() - 1,
        YColumn::Index(i) if *i < headers.len() => *i,
        YColumn::Index(i) => {
            return Err(IpodError::Data(format!(
                "response column {i} out of range ({} columns)",
                headers.len()
            )))
        }
        YColumn::Name(s) => headers
            .iter()
            .position(|h| h == s)
            .ok_or_else(|| IpodError::Data(format!("response column `{s}` not found")))?,
    };

    let ncol = headers.len();
    let mut cells = Vec::new();
    let mut nrow = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != ncol {
            return Err(IpodError::Ingest {
                row: r + 1,
                column: record.len().min(ncol) + 1,
                message: format!("expected {ncol} fields, found {}", record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| IpodError::Ingest {
                row: r + 1,
                column: c + 1,
                message: if field.is_empty() {
                    "missing value".to_string()
                } else {
                    format!("not a number: `{field}`")
                },
            })?;
            if !v.is_finite() {
                return Err(IpodError::Ingest {
                    row: r + 1,
                    column: c + 1,
                    message: format!("non-finite value `{field}`"),
                });
            }
            cells.push(v);
        }
        nrow += 1;
    }
    if nrow == 0 {
        return Err(IpodError::Data("table has no data rows".to_string()));
    }

    let table = DMatrix::from_row_slice(nrow, ncol, &cells);
    let x_cols: Vec<usize> = (0..ncol).filter(|&c| c != y_idx).collect();
    Ok(Dataset {
        name: name.to_string(),
        x_names: x_cols.iter().map(|&c| headers[c].clone()).collect(),
        y_name: headers[y_idx].clone(),
        x: table.select_columns(&x_cols),
        y: table.column(y_idx).into_owned(),
        note: String::new(),
    })
}

pub fn read_csv_path(path: &Path, y_column: &YColumn) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    ingest_csv(file, y_column, &name)
}

fn embedded(text: &str, name: &str, note: &str) -> Dataset {
    let mut d = ingest_csv(text.as_bytes(), &YColumn::Last, name).expect("bundled data parses");
    d.note = note.to_string();
    d
}

/// Hawkins, Bradu and Kass artificial data: 75 cases, 3 predictors. Cases
/// 1-10 (indices 0-9) are outliers at leverage points, cases 11-14 are good
/// leverage points.
pub fn hbk() -> Dataset {
    embedded(
        HBK_CSV,
        "hbk",
        "Hawkins, Bradu & Kass (1984) artificial data, via R package robustbase",
    )
}

/// Belgian international phone calls 1950-1973 (tens of millions).
pub fn telef() -> Dataset {
    embedded(
        TELEF_CSV,
        "telef",
        "Belgian phone calls 1950-1973, via R package robustbase",
    )
}

/// Hertzsprung-Russell diagram of star cluster CYG OB1.
pub fn stars() -> Dataset {
    embedded(
        STARS_CSV,
        "stars",
        "Star cluster CYG OB1 (log temperature, log light), via R package robustbase",
    )
}

pub fn builtin(name: &str) -> Option<Dataset> {
    match name {
        "hbk" => Some(hbk()),
        "telef" => Some(telef()),
        "stars" => Some(stars()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["hbk", "telef", "stars"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shapes() {
        let d = hbk();
        assert_eq!((d.x.nrows(), d.x.ncols()), (75, 3));
        assert_eq!(d.y_name, "Y");
        assert_eq!(d.x[(0, 0)], 10.1);
        assert_eq!(d.y[0], 9.7);
        assert_eq!(telef().n(), 24);
        assert_eq!(stars().n(), 47);
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn string_cell_reports_position() {
        let text = "a,b,y\n1,2,3\n4,x,6\n";
        match ingest_csv(text.as_bytes(), &YColumn::Last, "t") {
            Err(IpodError::Ingest { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_value_rejected() {
        let text = "a,y\n1,2\n,3\n";
        let err = ingest_csv(text.as_bytes(), &YColumn::Last, "t").unwrap_err();
        assert!(err.to_string().contains("missing value"));
    }

    #[test]
    fn response_selection() {
        let text = "y,a,b\n1,2,3\n4,5,6\n";
        let d = ingest_csv(text.as_bytes(), &"y".parse().unwrap(), "t").unwrap();
        assert_eq!(d.x_names, vec!["a", "b"]);
        assert_eq!(d.y.as_slice(), &[1.0, 4.0]);
        let d = ingest_csv(text.as_bytes(), &YColumn::Index(2), "t").unwrap();
        assert_eq!(d.y_name, "b");
        assert!(ingest_csv(text.as_bytes(), &"zz".parse().unwrap(), "t").is_err());
    }

    #[test]
    fn short_table_fails_at_problem() {
        let mut text = String::from("a,b,c,d,e,f,g,h,i,j,y\n");
        for r in 0..5 {
            let row: Vec<String> = (0..11).map(|c| (r * 11 + c).to_string()).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let d = ingest_csv(text.as_bytes(), &YColumn::Last, "t").unwrap();
        assert!(matches!(d.problem(true), Err(IpodError::TooFewCases { .. })));
    }
}
