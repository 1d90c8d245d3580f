//! Row-wise L1 reconstruction loss and its per-density-group summary.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::exec;
use crate::labelmatrix::{DensityProfile, LabelMatrix};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct RowLossReport {
    /// `Σ_j |m[i,j] − approx[i,j]|` for each row `i`.
    pub per_row_l1: Vec<f64>,
    pub group_of_row: Vec<usize>,
}

/// L1 distance between each binary row of `m` and the matching row of `approx`. The
/// approximation is used as is, without rounding or clamping.
pub fn row_l1_loss(
    m: &LabelMatrix,
    approx: &DenseMatrix,
    group_of_row: &[usize],
) -> Result<RowLossReport> {
    if m.shape() != approx.shape() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {:?} vs approximation {:?}",
            m.shape(),
            approx.shape()
        )));
    }
    if group_of_row.len() != m.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} group ids for {} rows",
            group_of_row.len(),
            m.n_rows()
        )));
    }
    let per_row_l1 = exec::map_range(m.n_rows(), |i| {
        let row = approx.row(i);
        let mut loss: f64 = row.iter().map(|x| x.abs()).sum();
        // swap |0 − x| for |1 − x| at the stored ones
        for &c in m.row(i) {
            let x = row[c as usize];
            loss += (1.0 - x).abs() - x.abs();
        }
        loss
    });
    Ok(RowLossReport {
        per_row_l1,
        group_of_row: group_of_row.to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupStats {
    pub density: f64,
    pub coverage: f64,
    pub mean_loss: f64,
    /// Population standard deviation over the group's rows.
    pub std_loss: f64,
    pub n_rows: usize,
}

/// Mean and population standard deviation of the row losses in each profile group.
pub fn group_stats(report: &RowLossReport, profile: &DensityProfile) -> Result<Vec<GroupStats>> {
    let k = profile.groups().len();
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (&loss, &g) in report.per_row_l1.iter().zip(&report.group_of_row) {
        if g >= k {
            return Err(Error::InvalidArgument(format!(
                "group id {g} outside a {k}-group profile"
            )));
        }
        buckets[g].push(loss);
    }
    profile
        .groups()
        .iter()
        .zip(&buckets)
        .enumerate()
        .map(|(g, (group, losses))| {
            if losses.is_empty() {
                return Err(Error::EmptyGroup(g));
            }
            let (mean, std) = mean_std(losses);
            Ok(GroupStats {
                density: group.density,
                coverage: group.coverage,
                mean_loss: mean,
                std_loss: std,
                n_rows: losses.len(),
            })
        })
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
