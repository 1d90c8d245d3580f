use crate::classify::{cosine, cosine_product_norm};
use crate::error::{Error, Result};
use crate::exec;
use crate::labelmatrix::LabelMatrix;
use serde::Serialize;
use std::io::{BufRead, Write};

pub const STS_HEADER: &str = "row_a,row_b,cosine";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairScore {
    pub row_a: usize,
    pub row_b: usize,
    pub cosine: f64,
}

/// Label-overlap similarity of each row pair. `literal` swaps the root-product
/// denominator for the plain product.
pub fn run_sts(m: &LabelMatrix, pairs: &[(usize, usize)], literal: bool) -> Result<Vec<PairScore>> {
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= m.n_rows() || b >= m.n_rows()) {
        return Err(Error::InvalidArgument(format!(
            "pair ({a}, {b}) outside {} rows",
            m.n_rows()
        )));
    }
    let score = if literal { cosine_product_norm } else { cosine };
    exec::try_map_slice(pairs, |&(a, b)| {
        Ok(PairScore {
            row_a: a,
            row_b: b,
            cosine: score(m.row(a), m.row(b))?,
        })
    })
}

/// Every unordered pair `(i, j)` with `i < j`.
pub fn all_pairs(n_rows: usize) -> Vec<(usize, usize)> {
    (0..n_rows)
        .flat_map(|i| (i + 1..n_rows).map(move |j| (i, j)))
        .collect()
}

/// Reads `row_a,row_b` lines; a header line with those names is optional.
pub fn read_pairs<R: BufRead>(r: R) -> Result<Vec<(usize, usize)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut pairs = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |msg: &str| Error::Parse {
            line: n + 1,
            msg: msg.to_string(),
        };
        if rec.len() != 2 {
            return Err(bad("expected two fields"));
        }
        if n == 0 && &rec[0] == "row_a" && &rec[1] == "row_b" {
            continue;
        }
        let a = rec[0].parse().map_err(|_| bad("bad row index"))?;
        let b = rec[1].parse().map_err(|_| bad("bad row index"))?;
        pairs.push((a, b));
    }
    Ok(pairs)
}

pub fn write_sts_csv<W: Write>(w: W, scores: &[PairScore]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(STS_HEADER.split(','))?;
    for s in scores {
        out.write_record([s.row_a.to_string(), s.row_b.to_string(), s.cosine.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
