use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::io::Read;

/// Where a representation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RepKind {
    /// The raw binary label row, truncated to `d` columns.
    #[serde(rename = "binary", alias = "binary-direct")]
    BinaryDirect,
    /// Rows of `U_r Σ_r` from a truncated SVD.
    #[serde(rename = "svd", alias = "svd-scores")]
    SvdScores,
    /// Vectors loaded from an external CSV file.
    #[serde(rename = "external")]
    External,
}

impl RepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RepKind::BinaryDirect => "binary",
            RepKind::SvdScores => "svd",
            RepKind::External => "external",
        }
    }
}

impl std::str::FromStr for RepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "binary-direct" => Ok(RepKind::BinaryDirect),
            "svd" | "svd-scores" => Ok(RepKind::SvdScores),
            "external" => Ok(RepKind::External),
            _ => Err(Error::InvalidArgument(format!("unknown representation {s:?}"))),
        }
    }
}

/// Labeled vectors for one classification dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationSet {
    vectors: DenseMatrix,
    labels: Vec<usize>,
    n_classes: usize,
    kind: RepKind,
}

impl RepresentationSet {
    pub fn new(vectors: DenseMatrix, labels: Vec<usize>, n_classes: usize, kind: RepKind) -> Result<Self> {
        if vectors.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors, {} labels",
                vectors.nrows(),
                labels.len()
            )));
        }
        if vectors.ncols() == 0 {
            return Err(Error::InvalidArgument("zero-dimensional vectors".into()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidArgument(format!("label {l} outside 0..{n_classes}")));
        }
        Ok(Self {
            vectors,
            labels,
            n_classes,
            kind,
        })
    }

    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn subset(&self, idx: &[usize]) -> RepresentationSet {
        RepresentationSet {
            vectors: self.vectors.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            kind: self.kind,
        }
    }

    /// Fraction of examples in the most common class.
    pub fn majority_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        let mut counts = vec![0usize; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        *counts.iter().max().unwrap() as f64 / self.labels.len() as f64
    }

    /// Reads `id,label,v0,...,v{d-1}` rows. Labels are class ids; the class count is one
    /// more than the largest label. Returns the ids alongside the set.
    pub fn read_csv<R: Read>(r: R) -> Result<(Vec<String>, RepresentationSet)> {
        let mut reader = csv::Reader::from_reader(r);
        let header = reader.headers()?.clone();
        let d = header.len().saturating_sub(2);
        let ok = header.len() >= 3
            && &header[0] == "id"
            && &header[1] == "label"
            && (0..d).all(|k| header[k + 2] == *format!("v{k}"));
        if !ok {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header id,label,v0,...,v{d-1}".into(),
            });
        }
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (n, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = n + 2;
            let bad = |msg: String| Error::Parse { line, msg };
            ids.push(rec[0].to_string());
            labels.push(
                rec[1]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| bad(format!("bad label {:?}", &rec[1])))?,
            );
            for k in 0..d {
                data.push(
                    rec[k + 2]
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("bad value {:?}", &rec[k + 2])))?,
                );
            }
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let vectors = DenseMatrix::from_row_major(labels.len(), d, data)?;
        Ok((ids, RepresentationSet::new(vectors, labels, n_classes, RepKind::External)?))
    }
}

/// Seeded stratified split: within each class the example indices are shuffled and the
/// first `round(train_fraction · count)` go to training. Both index lists are sorted.
pub fn stratified_split(
    labels: &[usize],
    n_classes: usize,
    train_fraction: f64,
    seed: RngSeed,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed.rng();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        let n_train = (train_fraction * members.len() as f64).round() as usize;
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
