use crate::dense::DenseBudget;
use crate::error::{Error, Result};
use crate::labelmatrix::LabelMatrix;
use std::io::Write;

/// Leading singular values with their running share of the total spectral energy.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub singular_values: Vec<f64>,
    /// `Σ_{j≤i} σ_j² / Σ_all σ_j²`
    pub cumulative_energy: Vec<f64>,
    /// `Σ_{j≤i} σ_j / Σ_all σ_j`
    pub cumulative_sigma: Vec<f64>,
}

impl SpectrumReport {
    /// Builds the report for the leading `k` values of a complete spectrum. Totals are
    /// taken over the whole spectrum so a partial report ends below 1.
    pub fn from_full_spectrum(all: &[f64], k: usize) -> Result<Self> {
        if k > all.len() {
            return Err(Error::RankOutOfRange {
                rank: k,
                max: all.len(),
            });
        }
        let energy: f64 = all.iter().map(|s| s * s).sum();
        let mass: f64 = all.iter().sum();
        let mut cumulative_energy = Vec::with_capacity(k);
        let mut cumulative_sigma = Vec::with_capacity(k);
        let (mut e, mut s) = (0.0, 0.0);
        for &x in &all[..k] {
            e += x * x;
            s += x;
            cumulative_energy.push(if energy > 0.0 { e / energy } else { 0.0 });
            cumulative_sigma.push(if mass > 0.0 { s / mass } else { 0.0 });
        }
        if k == all.len() && energy > 0.0 {
            // exact final point, free of summation-order rounding
            cumulative_energy[k - 1] = 1.0;
            cumulative_sigma[k - 1] = 1.0;
        }
        Ok(Self {
            singular_values: all[..k].to_vec(),
            cumulative_energy,
            cumulative_sigma,
        })
    }

    /// CSV with header `index,sigma,cumulative_energy`; `with_sigma_cdf` appends a
    /// `cumulative_sigma` column. Indices start at 1.
    pub fn write_csv<W: Write>(&self, w: W, with_sigma_cdf: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["index", "sigma", "cumulative_energy"];
        if with_sigma_cdf {
            header.push("cumulative_sigma");
        }
        out.write_record(&header)?;
        for i in 0..self.singular_values.len() {
            let mut rec = vec![
                (i + 1).to_string(),
                self.singular_values[i].to_string(),
                self.cumulative_energy[i].to_string(),
            ];
            if with_sigma_cdf {
                rec.push(self.cumulative_sigma[i].to_string());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Leading `k` singular values of `m` (exact), with cumulative energy.
pub fn spectrum(m: &LabelMatrix, k: usize, budget: DenseBudget) -> Result<SpectrumReport> {
    let full = m.n_rows().min(m.n_cols());
    if k == 0 || k > full {
        return Err(Error::RankOutOfRange { rank: k, max: full });
    }
    let values = m
        .to_faer(budget)?
        .singular_values()
        .map_err(|_| Error::SvdNoConvergence)?;
    SpectrumReport::from_full_spectrum(&values, k)
}
