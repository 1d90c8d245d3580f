//! The binary sentence × task-label matrix.
//!
//! Rows are sentences, columns are labels of classification tasks, and a stored index
//! means the sentence carries that label. Storage is compressed row-major: each row is a
//! sorted, duplicate-free run of column indices.

mod dataset;
mod generate;
mod io;
mod profile;
mod validate;

pub use dataset::{check_embedding, embed_datasets, DatasetSpec, DatasetViolation};
pub use generate::{generate, sample_bernoulli_rows, GeneratedMatrix, MAX_ROW_RETRIES};
pub use profile::{Assignment, DensityGroup, DensityProfile};
pub use validate::{validate, ValidationReport};

use crate::dense::{DenseBudget, DenseMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMatrix {
    n_rows: usize,
    n_cols: usize,
    offsets: Vec<usize>,
    indices: Vec<u32>,
}

impl LabelMatrix {
    /// Builds a matrix from per-row index lists. Each list is sorted and deduplicated;
    /// out-of-range indices are rejected.
    pub fn from_rows<I, R>(n_cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = usize>,
    {
        let mut builder = Builder::new(n_cols)?;
        let mut scratch = Vec::new();
        for row in rows {
            scratch.clear();
            scratch.extend(row);
            scratch.sort_unstable();
            scratch.dedup();
            if let Some(&bad) = scratch.last().filter(|&&c| c >= n_cols) {
                return Err(Error::InvalidArgument(format!(
                    "column index {bad} out of range for {n_cols} columns"
                )));
            }
            builder.push_sorted(scratch.iter().map(|&c| c as u32));
        }
        Ok(builder.finish())
    }

    /// Re-sparsifies a dense matrix: every nonzero entry becomes a stored index.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        Self::from_rows(
            m.ncols(),
            (0..m.nrows()).map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(j, _)| j)
                    .collect::<Vec<_>>()
            }),
        )
    }

    /// The `n × n` identity pattern.
    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| [i])).expect("identity indices are in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn density(&self) -> f64 {
        if self.n_rows == 0 || self.n_cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n_rows as f64 * self.n_cols as f64)
    }

    /// Sorted column indices of row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_cols];
        for &c in &self.indices {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Column-major view of the same pattern, as the matrix of the transpose.
    pub fn transpose(&self) -> LabelMatrix {
        let counts = self.column_counts();
        let mut offsets = Vec::with_capacity(self.n_cols + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..self.n_cols].to_vec();
        let mut indices = vec![0u32; self.nnz()];
        // rows are visited in ascending order, so every column run comes out sorted
        for i in 0..self.n_rows {
            for &c in self.row(i) {
                indices[cursor[c as usize]] = i as u32;
                cursor[c as usize] += 1;
            }
        }
        LabelMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            offsets,
            indices,
        }
    }

    /// Dense 0/1 copy, refused when it would exceed `budget`.
    pub fn densify(&self, budget: DenseBudget) -> Result<DenseMatrix> {
        budget.check(self.n_rows, self.n_cols)?;
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let row = out.row_mut(i);
            for &c in self.row(i) {
                row[c as usize] = 1.0;
            }
        }
        Ok(out)
    }

    /// Dense column-major copy for the factorization kernels.
    pub(crate) fn to_faer(&self, budget: DenseBudget) -> Result<faer::Mat<f64>> {
        budget.check(self.n_rows, self.n_cols)?;
        let mut out = faer::Mat::<f64>::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for &c in self.row(i) {
                out[(i, c as usize)] = 1.0;
            }
        }
        Ok(out)
    }
}

/// Incremental row-by-row construction.
pub(crate) struct Builder {
    n_cols: usize,
    offsets: Vec<usize>,
    indices: Vec<u32>,
}

impl Builder {
    pub(crate) fn new(n_cols: usize) -> Result<Self> {
        if n_cols > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "{n_cols} columns exceed the u32 index range"
            )));
        }
        Ok(Self {
            n_cols,
            offsets: vec![0],
            indices: Vec::new(),
        })
    }

    /// Caller guarantees ascending, duplicate-free, in-range indices.
    pub(crate) fn push_sorted(&mut self, row: impl IntoIterator<Item = u32>) {
        self.indices.extend(row);
        self.offsets.push(self.indices.len());
    }

    pub(crate) fn row(&self, k: usize) -> &[u32] {
        &self.indices[self.offsets[k]..self.offsets[k + 1]]
    }

    pub(crate) fn finish(self) -> LabelMatrix {
        LabelMatrix {
            n_rows: self.offsets.len() - 1,
            n_cols: self.n_cols,
            offsets: self.offsets,
            indices: self.indices,
        }
    }
}
