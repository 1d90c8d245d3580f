use super::{Builder, LabelMatrix};
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A `k`-way classification dataset living inside a label matrix: its examples occupy
/// a block of consecutive rows and its classes own `k` columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub row_start: usize,
    pub class_columns: Vec<usize>,
    /// Class id of each example, in row order.
    pub labels: Vec<usize>,
}

impl DatasetSpec {
    pub fn new(
        name: impl Into<String>,
        row_start: usize,
        class_columns: Vec<usize>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            row_start,
            class_columns,
            labels,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Labels drawn uniformly over the `class_columns.len()` classes.
    pub fn with_random_labels(
        name: impl Into<String>,
        row_start: usize,
        n_examples: usize,
        class_columns: Vec<usize>,
        seed: RngSeed,
    ) -> Result<Self> {
        let k = class_columns.len();
        if k < 2 {
            return Err(Error::DatasetLayout(format!("{k} classes, need at least 2")));
        }
        let mut rng = seed.rng();
        let labels = (0..n_examples).map(|_| rng.random_range(0..k)).collect();
        Self::new(name, row_start, class_columns, labels)
    }

    pub fn n_examples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_columns.len()
    }

    pub fn rows(&self) -> std::ops::Range<usize> {
        self.row_start..self.row_start + self.labels.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.class_columns.len();
        if k < 2 {
            return Err(Error::DatasetLayout(format!(
                "{}: {k} classes, need at least 2",
                self.name
            )));
        }
        let mut cols = self.class_columns.clone();
        cols.sort_unstable();
        cols.dedup();
        if cols.len() != k {
            return Err(Error::DatasetLayout(format!(
                "{}: repeated class column",
                self.name
            )));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= k) {
            return Err(Error::DatasetLayout(format!(
                "{}: label {l} outside 0..{k}",
                self.name
            )));
        }
        Ok(())
    }
}

/// Breach of the one-hot embedding contract found by [`check_embedding`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DatasetViolation {
    pub dataset: String,
    pub row: usize,
    pub detail: String,
}

fn check_layout(n_rows: usize, n_cols: usize, specs: &[DatasetSpec]) -> Result<()> {
    let mut row_owner = vec![usize::MAX; n_rows];
    let mut col_owner = vec![usize::MAX; n_cols];
    for (s, spec) in specs.iter().enumerate() {
        spec.check()?;
        if spec.rows().end > n_rows {
            return Err(Error::DatasetLayout(format!(
                "{}: rows {:?} exceed {n_rows} matrix rows",
                spec.name,
                spec.rows()
            )));
        }
        for r in spec.rows() {
            if row_owner[r] != usize::MAX {
                return Err(Error::DatasetLayout(format!(
                    "{} and {} both claim row {r}",
                    specs[row_owner[r]].name, spec.name
                )));
            }
            row_owner[r] = s;
        }
        for &c in &spec.class_columns {
            if c >= n_cols {
                return Err(Error::DatasetLayout(format!(
                    "{}: class column {c} exceeds {n_cols} matrix columns",
                    spec.name
                )));
            }
            if col_owner[c] != usize::MAX {
                return Err(Error::DatasetLayout(format!(
                    "{} and {} both claim column {c}",
                    specs[col_owner[c]].name, spec.name
                )));
            }
            col_owner[c] = s;
        }
    }
    Ok(())
}

/// Writes each dataset's labels into its class columns as one-hot rows and clears those
/// columns in every other row. Cells outside the class columns are left alone.
pub fn embed_datasets(m: &LabelMatrix, specs: &[DatasetSpec]) -> Result<LabelMatrix> {
    check_layout(m.n_rows(), m.n_cols(), specs)?;
    if specs.is_empty() {
        return Ok(m.clone());
    }
    let mut is_class_col = vec![false; m.n_cols()];
    for c in specs.iter().flat_map(|s| &s.class_columns) {
        is_class_col[*c] = true;
    }
    let mut label_col: Vec<Option<u32>> = vec![None; m.n_rows()];
    for spec in specs {
        for (r, &l) in spec.rows().zip(&spec.labels) {
            label_col[r] = Some(spec.class_columns[l] as u32);
        }
    }
    let mut builder = Builder::new(m.n_cols())?;
    let mut row = Vec::new();
    for i in 0..m.n_rows() {
        row.clear();
        row.extend(m.row(i).iter().copied().filter(|&c| !is_class_col[c as usize]));
        if let Some(c) = label_col[i] {
            let at = row.partition_point(|&x| x < c);
            row.insert(at, c);
        }
        builder.push_sorted(row.iter().copied());
    }
    Ok(builder.finish())
}

/// Exhaustive check that every example row holds exactly its label's class column among
/// all datasets' class columns, and that no other row holds any class column.
pub fn check_embedding(m: &LabelMatrix, specs: &[DatasetSpec]) -> Result<Vec<DatasetViolation>> {
    check_layout(m.n_rows(), m.n_cols(), specs)?;
    let mut owner: Vec<Option<(usize, usize)>> = vec![None; m.n_rows()];
    for (s, spec) in specs.iter().enumerate() {
        for (e, r) in spec.rows().enumerate() {
            owner[r] = Some((s, e));
        }
    }
    let mut violations = Vec::new();
    for i in 0..m.n_rows() {
        for (s, spec) in specs.iter().enumerate() {
            let set: Vec<usize> = spec
                .class_columns
                .iter()
                .copied()
                .filter(|&c| m.get(i, c))
                .collect();
            let expected = match owner[i] {
                Some((owner_s, e)) if owner_s == s => vec![spec.class_columns[spec.labels[e]]],
                _ => vec![],
            };
            if set != expected {
                violations.push(DatasetViolation {
                    dataset: spec.name.clone(),
                    row: i,
                    detail: format!("class columns set {set:?}, expected {expected:?}"),
                });
            }
        }
    }
    Ok(violations)
}
