//! Reading and writing the numeric CSV files of a run.
//!
//! Files have a header row, `.` as decimal separator and one record per
//! line. Numbers are written in Rust's shortest round-trip form, so reading
//! a file back gives bit-identical values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use volterra_exec::linalg::Matrix;

/// A table held as text, written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, fields: &[Field]) {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            first = false;
            match f {
                Field::Int(v) => write!(self.text, "{v}").expect("writing to a String"),
                Field::Num(v) => write!(self.text, "{v:?}").expect("writing to a String"),
                Field::Text(v) => self.text.push_str(v),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, &self.text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(u64),
    Num(f64),
    Text(String),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Self::Int(v as u64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Self::Int(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

/// Header and rows of a CSV file with numeric records.
pub fn parse(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    let rows = lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| format!("line {}: `{}`: {e}", i + 2, f.trim()))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn read(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// The single column of a one-column file.
pub fn read_column(path: &Path) -> Result<Vec<f64>, String> {
    let (header, rows) = read(path)?;
    if header.len() != 1 || rows.iter().any(|r| r.len() != 1) {
        return Err(format!("{}: expected exactly one column", path.display()));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

/// A square matrix stored one row per record.
pub fn read_matrix(path: &Path) -> Result<Matrix<f64>, String> {
    let (header, rows) = read(path)?;
    let size = header.len();
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(format!(
            "{}: expected a square matrix with {size} rows of {size} values",
            path.display()
        ));
    }
    Matrix::from_rows(size, size, rows.concat()).map_err(|e| e.to_string())
}
