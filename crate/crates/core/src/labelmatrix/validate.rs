use super::LabelMatrix;
use serde::Serialize;
use std::collections::HashMap;

/// Structural findings about a label matrix. A matrix is a valid sentence/task-label
/// matrix when every list is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n_rows: usize,
    pub n_cols: usize,
    pub empty_rows: Vec<usize>,
    pub empty_cols: Vec<usize>,
    /// `(first, repeat)` pairs: row `repeat` equals the earlier row `first`.
    pub duplicate_rows: Vec<(usize, usize)>,
    pub duplicate_cols: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.empty_rows.is_empty()
            && self.empty_cols.is_empty()
            && self.duplicate_rows.is_empty()
            && self.duplicate_cols.is_empty()
    }
}

pub fn validate(m: &LabelMatrix) -> ValidationReport {
    let t = m.transpose();
    let (empty_rows, duplicate_rows) = scan(m);
    let (empty_cols, duplicate_cols) = scan(&t);
    ValidationReport {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        empty_rows,
        empty_cols,
        duplicate_rows,
        duplicate_cols,
    }
}

/// Empty rows, and every repeat of a non-empty row paired with its first occurrence.
/// Repeated empty rows are reported only as empty.
fn scan(m: &LabelMatrix) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut empty = Vec::new();
    let mut dups = Vec::new();
    let mut first: HashMap<&[u32], usize> = HashMap::new();
    for (i, row) in m.rows().enumerate() {
        if row.is_empty() {
            empty.push(i);
            continue;
        }
        match first.get(row) {
            Some(&k) => dups.push((k, i)),
            None => {
                first.insert(row, i);
            }
        }
    }
    (empty, dups)
}
