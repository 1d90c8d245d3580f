use super::{Factorization, SvdMethod};
use crate::dense::DenseBudget;
use crate::error::{Error, Result};
use crate::exec;
use crate::labelmatrix::LabelMatrix;
use crate::seed::RngSeed;
use faer::Mat;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizedParams {
    /// Extra sketch columns beyond the target rank.
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: RngSeed,
    /// Below this fill fraction products run on the sparse pattern instead of a dense copy.
    pub sparse_below_density: f64,
}

impl Default for RandomizedParams {
    fn default() -> Self {
        Self {
            oversampling: 10,
            power_iterations: 2,
            seed: RngSeed(0),
            sparse_below_density: 0.05,
        }
    }
}

/// `A` as a linear operator, either densified or applied straight from the index sets.
enum Operator<'a> {
    Dense(Mat<f64>),
    Sparse {
        rows: &'a LabelMatrix,
        cols: LabelMatrix,
    },
}

impl<'a> Operator<'a> {
    fn new(m: &'a LabelMatrix, params: &RandomizedParams, budget: DenseBudget) -> Result<Self> {
        let fits = budget.check(m.n_rows(), m.n_cols()).is_ok();
        if fits && m.density() >= params.sparse_below_density {
            Ok(Operator::Dense(m.to_faer(budget)?))
        } else {
            Ok(Operator::Sparse {
                rows: m,
                cols: m.transpose(),
            })
        }
    }

    /// `A · x`
    fn apply(&self, x: &Mat<f64>) -> Mat<f64> {
        match self {
            Operator::Dense(a) => a * x,
            Operator::Sparse { rows, .. } => gather(rows, x),
        }
    }

    /// `Aᵀ · x`
    fn apply_t(&self, x: &Mat<f64>) -> Mat<f64> {
        match self {
            Operator::Dense(a) => a.transpose() * x,
            Operator::Sparse { cols, .. } => gather(cols, x),
        }
    }
}

/// `out[i, c] = Σ_{j ∈ pattern.row(i)} x[j, c]`, one independent task per output column.
fn gather(pattern: &LabelMatrix, x: &Mat<f64>) -> Mat<f64> {
    let n = pattern.n_rows();
    let columns: Vec<Vec<f64>> = exec::map_range(x.ncols(), |c| {
        let col: Vec<f64> = (0..x.nrows()).map(|j| x[(j, c)]).collect();
        (0..n)
            .map(|i| pattern.row(i).iter().map(|&j| col[j as usize]).sum())
            .collect()
    });
    Mat::from_fn(n, x.ncols(), |i, c| columns[c][i])
}

fn orthonormal_basis(y: &Mat<f64>) -> Mat<f64> {
    y.qr().compute_thin_Q()
}

pub(super) fn randomized_svd(
    m: &LabelMatrix,
    r: usize,
    params: &RandomizedParams,
    budget: DenseBudget,
) -> Result<Factorization> {
    let (rows, cols) = m.shape();
    let width = (r + params.oversampling).min(rows.min(cols));
    budget.check(cols.max(rows), width)?;
    let op = Operator::new(m, params, budget)?;

    // Gaussian test matrix, drawn column by column so the stream order is fixed.
    let mut rng = params.seed.child("sketch", 0).rng();
    let mut draws = Vec::with_capacity(cols * width);
    for _ in 0..cols * width {
        draws.push(StandardNormal.sample(&mut rng));
    }
    let omega = Mat::from_fn(cols, width, |j, c| draws[c * cols + j]);
    drop(draws);

    let mut q = orthonormal_basis(&op.apply(&omega));
    drop(omega);
    for _ in 0..params.power_iterations {
        let z = orthonormal_basis(&op.apply_t(&q));
        q = orthonormal_basis(&op.apply(&z));
    }

    // Bᵀ = Aᵀ Q, so B = Qᵀ A = Ũ Σ Vᵀ with Ũ and V read off the SVD of Bᵀ = V Σ Ũᵀ.
    let bt = op.apply_t(&q);
    drop(op);
    let svd = bt.thin_svd().map_err(|_| Error::SvdNoConvergence)?;
    drop(bt);
    let u = &q * svd.V();
    let s = svd.S().column_vector();
    Ok(Factorization::from_faer_parts(
        u.as_ref(),
        (0..r).map(|k| s[k]),
        svd.U(),
        r,
        SvdMethod::Randomized,
        (rows, cols),
    ))
}
