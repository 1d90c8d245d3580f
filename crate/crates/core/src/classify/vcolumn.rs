//! Thresholding the projection of a low-rank representation onto one label's right
//! singular vector row: `score(i) = (U_r Σ_r)_i · V_r[label]`, which is entry
//! `(i, label)` of the rank-`r` reconstruction.

use crate::error::{Error, Result};
use crate::factorization::Factorization;
use crate::labelmatrix::LabelMatrix;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Predict the label when the score is above the threshold.
    Positive,
    /// Predict the label when the score is below the threshold.
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VColumnClassifier {
    pub label_col: usize,
    pub threshold: f64,
    pub direction: Direction,
    pub train_accuracy: f64,
}

impl VColumnClassifier {
    pub fn predict(&self, score: f64) -> bool {
        match self.direction {
            Direction::Positive => score > self.threshold,
            Direction::Negative => score < self.threshold,
        }
    }

    /// Accuracy over `rows` of `m` using scores from `f`.
    pub fn accuracy(&self, f: &Factorization, m: &LabelMatrix, rows: &[usize]) -> f64 {
        let scores = v_column_scores(f, self.label_col);
        let hits = rows
            .iter()
            .filter(|&&i| self.predict(scores[i]) == m.get(i, self.label_col))
            .count();
        hits as f64 / rows.len().max(1) as f64
    }
}

/// Reconstructed value of column `label_col` for every row.
pub fn v_column_scores(f: &Factorization, label_col: usize) -> Vec<f64> {
    let v = f.v().row(label_col);
    let weights: Vec<f64> = v.iter().zip(f.sigma()).map(|(a, s)| a * s).collect();
    (0..f.u().nrows())
        .map(|i| f.u().row(i).iter().zip(&weights).map(|(a, b)| a * b).sum())
        .collect()
}

/// Picks the threshold and direction with the best training accuracy. Candidates are a
/// point below every training score (constant predictions, so the majority class is
/// always reachable) and `threshold_grid` midpoints of equal-width cells spanning the
/// training scores. Ties keep the earliest candidate, positive direction first.
pub fn v_column_classifier(
    f: &Factorization,
    m: &LabelMatrix,
    label_col: usize,
    train_rows: &[usize],
    threshold_grid: usize,
) -> Result<VColumnClassifier> {
    if label_col >= m.n_cols() || label_col >= f.v().nrows() {
        return Err(Error::InvalidArgument(format!(
            "label column {label_col} outside the matrix"
        )));
    }
    if f.source_dims() != m.shape() {
        return Err(Error::DimensionMismatch(format!(
            "factorization of {:?} used with a {:?} matrix",
            f.source_dims(),
            m.shape()
        )));
    }
    if train_rows.is_empty() || threshold_grid == 0 {
        return Err(Error::InvalidArgument(
            "need training rows and at least one grid point".into(),
        ));
    }
    let scores = v_column_scores(f, label_col);
    let truth: Vec<bool> = train_rows.iter().map(|&i| m.get(i, label_col)).collect();
    let positives = truth.iter().filter(|&&t| t).count();
    if positives == 0 || positives == truth.len() {
        return Err(Error::ConstantLabelColumn(label_col));
    }
    let s: Vec<f64> = train_rows.iter().map(|&i| scores[i]).collect();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;

    let candidates = std::iter::once(lo - 1.0 - width.abs())
        .chain((0..threshold_grid).map(|j| lo + width * (j as f64 + 0.5) / threshold_grid as f64));
    let mut best: Option<VColumnClassifier> = None;
    for t in candidates {
        for direction in [Direction::Positive, Direction::Negative] {
            let c = VColumnClassifier {
                label_col,
                threshold: t,
                direction,
                train_accuracy: 0.0,
            };
            let hits = s.iter().zip(&truth).filter(|(&x, &y)| c.predict(x) == y).count();
            let acc = hits as f64 / s.len() as f64;
            if best.is_none_or(|b| acc > b.train_accuracy) {
                best = Some(VColumnClassifier {
                    train_accuracy: acc,
                    ..c
                });
            }
        }
    }
    Ok(best.expect("at least one candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseBudget;
    use crate::factorization::svd_full;

    #[test]
    fn full_rank_separates_perfectly() {
        let m = LabelMatrix::from_rows(
            5,
            [vec![0, 1], vec![1, 2], vec![0, 3], vec![2, 4], vec![0, 4], vec![3]],
        )
        .unwrap();
        let f = svd_full(&m, DenseBudget::DEFAULT).unwrap();
        let rows: Vec<usize> = (0..6).collect();
        for grid in [1, 2, 7] {
            let c = v_column_classifier(&f, &m, 0, &rows, grid).unwrap();
            assert_eq!(c.train_accuracy, 1.0, "grid {grid}");
            assert_eq!(c.direction, Direction::Positive);
        }
    }

    #[test]
    fn constant_column_rejected() {
        let m = LabelMatrix::from_rows(3, [vec![0, 1], vec![0, 2], vec![0]]).unwrap();
        let f = svd_full(&m, DenseBudget::DEFAULT).unwrap();
        assert!(matches!(
            v_column_classifier(&f, &m, 0, &[0, 1, 2], 5),
            Err(Error::ConstantLabelColumn(0))
        ));
        assert!(v_column_classifier(&f, &m, 3, &[0, 1, 2], 5).is_err());
    }
}
