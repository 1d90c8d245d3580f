//! Truncated singular value decompositions of label matrices.
//!
//! The exact path densifies the matrix and runs a bidiagonalization-based SVD. The
//! randomized path sketches the range with a seeded Gaussian test matrix, sharpens it
//! with power iterations and solves a small dense SVD; it works on the sparse pattern
//! directly when the matrix is sparse or too large to densify.

mod randomized;
mod spectrum;

pub use randomized::RandomizedParams;
pub use spectrum::{spectrum, SpectrumReport};

use crate::dense::{DenseBudget, DenseMatrix};
use crate::error::{Error, Result};
use crate::labelmatrix::LabelMatrix;
use faer::Mat;
use serde::{Deserialize, Serialize};

/// Relative cutoff used by [`numerical_rank`] when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SvdMethod {
    #[default]
    Exact,
    Randomized,
}

impl SvdMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SvdMethod::Exact => "exact",
            SvdMethod::Randomized => "randomized",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SvdOptions {
    #[serde(default)]
    pub budget: DenseBudget,
    #[serde(default)]
    pub randomized: RandomizedParams,
}

/// Leading singular triplets `(U_r, Σ_r, V_r)` of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    u: DenseMatrix,
    sigma: Vec<f64>,
    v: DenseMatrix,
    method: SvdMethod,
    source_dims: (usize, usize),
}

impl Factorization {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `n_rows × r` left singular vectors.
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    /// Singular values, non-increasing.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `n_cols × r` right singular vectors.
    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn method(&self) -> SvdMethod {
        self.method
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    /// True when every singular value of the source matrix is present.
    pub fn has_full_spectrum(&self) -> bool {
        self.rank() == self.source_dims.0.min(self.source_dims.1)
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(&self, r: usize) -> Result<Factorization> {
        if r == 0 || r > self.rank() {
            return Err(Error::RankOutOfRange {
                rank: r,
                max: self.rank(),
            });
        }
        Ok(Factorization {
            u: self.u.leading_columns(r),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.leading_columns(r),
            method: self.method,
            source_dims: self.source_dims,
        })
    }

    /// Principal-component scores `U_r Σ_r`, one row per source row. These are the
    /// low-dimensional representations handed to downstream classifiers.
    pub fn scores(&self) -> DenseMatrix {
        let r = self.rank();
        let mut out = self.u.clone();
        for i in 0..out.nrows() {
            let row = out.row_mut(i);
            for k in 0..r {
                row[k] *= self.sigma[k];
            }
        }
        out
    }

    /// Scores of one source row.
    pub fn score_row(&self, i: usize) -> Vec<f64> {
        self.u
            .row(i)
            .iter()
            .zip(&self.sigma)
            .map(|(u, s)| u * s)
            .collect()
    }

    pub fn write_text(&self, u: impl std::io::Write, sigma: impl std::io::Write, v: impl std::io::Write) -> Result<()> {
        self.u.write_text(u)?;
        DenseMatrix::from_row_major(self.rank(), 1, self.sigma.clone())?.write_text(sigma)?;
        self.v.write_text(v)
    }

    pub(crate) fn from_faer_parts(
        u: faer::MatRef<'_, f64>,
        sigma: impl IntoIterator<Item = f64>,
        v: faer::MatRef<'_, f64>,
        r: usize,
        method: SvdMethod,
        source_dims: (usize, usize),
    ) -> Factorization {
        Factorization {
            u: DenseMatrix::from_faer(u.subcols(0, r)),
            sigma: sigma.into_iter().take(r).collect(),
            v: DenseMatrix::from_faer(v.subcols(0, r)),
            method,
            source_dims,
        }
    }
}

fn check_rank(m: &LabelMatrix, r: usize) -> Result<()> {
    let max = m.n_rows().min(m.n_cols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    Ok(())
}

/// Leading-`r` SVD of `m` by the chosen method.
pub fn svd_truncated(
    m: &LabelMatrix,
    r: usize,
    method: SvdMethod,
    opts: &SvdOptions,
) -> Result<Factorization> {
    check_rank(m, r)?;
    match method {
        SvdMethod::Exact => exact(m, r, opts.budget),
        SvdMethod::Randomized => randomized::randomized_svd(m, r, &opts.randomized, opts.budget),
    }
}

/// Exact SVD keeping every singular triplet.
pub fn svd_full(m: &LabelMatrix, budget: DenseBudget) -> Result<Factorization> {
    exact(m, m.n_rows().min(m.n_cols()), budget)
}

fn exact(m: &LabelMatrix, r: usize, budget: DenseBudget) -> Result<Factorization> {
    check_rank(m, r)?;
    let a = m.to_faer(budget)?;
    let svd = a.thin_svd().map_err(|_| Error::SvdNoConvergence)?;
    let s = svd.S().column_vector();
    Ok(Factorization::from_faer_parts(
        svd.U(),
        (0..r).map(|k| s[k]),
        svd.V(),
        r,
        SvdMethod::Exact,
        m.shape(),
    ))
}

/// `U_r Σ_r V_rᵀ` as a dense matrix.
pub fn reconstruct(f: &Factorization, budget: DenseBudget) -> Result<DenseMatrix> {
    let (rows, cols) = f.source_dims;
    budget.check(rows, cols)?;
    let scores = f.scores().to_faer();
    let v: Mat<f64> = f.v.to_faer();
    let out = &scores * v.transpose();
    Ok(DenseMatrix::from_faer(out.as_ref()))
}

/// Frobenius error of the best rank-`r` approximation, `sqrt(Σ_{i>r} σ_i²)`, from a
/// factorization that holds the full spectrum.
pub fn eym_bound(f_full: &Factorization, r: usize) -> Result<f64> {
    if !f_full.has_full_spectrum() {
        return Err(Error::InvalidArgument(format!(
            "tail bound needs the full spectrum; factorization keeps {} of {}",
            f_full.rank(),
            f_full.source_dims.0.min(f_full.source_dims.1)
        )));
    }
    if r > f_full.rank() {
        return Err(Error::RankOutOfRange {
            rank: r,
            max: f_full.rank(),
        });
    }
    Ok(f_full.sigma[r..].iter().map(|s| s * s).sum::<f64>().sqrt())
}

/// Number of singular values above `tol · σ_1`.
pub fn numerical_rank(f: &Factorization, tol: f64) -> usize {
    let Some(&top) = f.sigma.first() else {
        return 0;
    };
    if top == 0.0 {
        return 0;
    }
    f.sigma.iter().filter(|&&s| s > tol * top).count()
}
