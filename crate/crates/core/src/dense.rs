//! Row-major dense matrices, the memory budget that guards densification, and the
//! plain-text dense file format (`densematrix v1 <rows> <cols>` followed by one line of
//! space-separated reals per row).

use crate::error::{Error, Result};
use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::ops::{Index, IndexMut};

/// Upper bound on the number of `f64` elements any single dense matrix may hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseBudget(pub usize);

impl DenseBudget {
    /// 150M elements, about 1.2 GB of `f64`.
    pub const DEFAULT: DenseBudget = DenseBudget(150_000_000);

    pub fn check(self, rows: usize, cols: usize) -> Result<()> {
        match rows.checked_mul(cols) {
            Some(n) if n <= self.0 => Ok(()),
            _ => Err(Error::DenseBudgetExceeded {
                rows,
                cols,
                budget: self.0,
            }),
        }
    }
}

impl Default for DenseBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        DenseMatrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps the leading `cols` columns.
    pub fn leading_columns(&self, cols: usize) -> DenseMatrix {
        let cols = cols.min(self.cols);
        DenseMatrix::from_fn(self.rows, cols, |i, j| self[(i, j)])
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn frobenius_distance(&self, other: &DenseMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `selfᵀ · self`, useful for orthonormality checks.
    pub fn gram(&self) -> DenseMatrix {
        let m = self.to_faer();
        DenseMatrix::from_faer((m.transpose() * &m).as_ref())
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_faer(m: MatRef<'_, f64>) -> DenseMatrix {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "densematrix v1 {} {}", self.rows, self.cols)?;
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{x:e}"));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<DenseMatrix> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })??;
        let (rows, cols) = parse_header(&header, "densematrix")?;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let lineno = i + 2;
            let line = lines.next().ok_or(Error::Parse {
                line: lineno,
                msg: format!("expected {rows} rows, found {i}"),
            })??;
            let before = data.len();
            for tok in line.split_ascii_whitespace() {
                data.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("{tok:?}: {e}"),
                })?);
            }
            if data.len() - before != cols {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {cols} values, found {}", data.len() - before),
                });
            }
        }
        if let Some(extra) = lines.next() {
            if !extra?.is_empty() {
                return Err(Error::Parse {
                    line: rows + 2,
                    msg: "trailing content after last row".into(),
                });
            }
        }
        DenseMatrix::from_row_major(rows, cols, data)
    }
}

/// Parses `<magic> v1 <rows> <cols>`.
pub(crate) fn parse_header(header: &str, magic: &str) -> Result<(usize, usize)> {
    let bad = |msg: String| Error::Parse { line: 1, msg };
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 4 || parts[0] != magic || parts[1] != "v1" {
        return Err(bad(format!("expected `{magic} v1 <rows> <cols>`, got {header:?}")));
    }
    let rows = parts[2]
        .parse()
        .map_err(|_| bad(format!("bad row count {:?}", parts[2])))?;
    let cols = parts[3]
        .parse()
        .map_err(|_| bad(format!("bad column count {:?}", parts[3])))?;
    Ok((rows, cols))
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
