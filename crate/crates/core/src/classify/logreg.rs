//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! The objective is the mean softmax cross-entropy plus `l2/2 · ‖W‖²` (the bias is not
//! penalized). Each step backtracks by halving until the Armijo condition holds, so the
//! training loss never increases; the next step starts from twice the accepted one.

use super::representation::RepresentationSet;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use serde::{Deserialize, Serialize};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub l2: f64,
    /// Initial step size.
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    pub seed: RngSeed,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            step: 1.0,
            max_iter: 2000,
            tol: 1e-6,
            seed: RngSeed(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingMeta {
    pub iterations: usize,
    pub final_loss: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub seed: RngSeed,
    /// Objective value before the first step and after every accepted step.
    pub loss_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedClassifier {
    /// `k × d`
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    pub meta: TrainingMeta,
}

impl TrainedClassifier {
    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Argmax class; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.n_classes() {
            let s = dot(self.weights.row(c), x) + self.bias[c];
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub accuracy: f64,
    pub n_test: usize,
    /// `(correct, total)` per class.
    pub per_class: Vec<(usize, usize)>,
}

impl EvalResult {
    /// Per-class accuracy; `None` for classes absent from the test set.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        self.per_class
            .iter()
            .map(|&(c, t)| (t > 0).then(|| c as f64 / t as f64))
            .collect()
    }
}

/// Four independent accumulators keep the reduction vectorizable.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Softmax probabilities of one row written into `p`; returns `log Σ exp(z)`.
fn softmax_row(x: &[f64], w: &DenseMatrix, b: &[f64], p: &mut [f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for c in 0..p.len() {
        p[c] = dot(w.row(c), x) + b[c];
        max = max.max(p[c]);
    }
    let mut sum = 0.0;
    for z in p.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    for z in p.iter_mut() {
        *z /= sum;
    }
    max + sum.ln()
}

fn loss_only(w: &DenseMatrix, b: &[f64], x: &DenseMatrix, labels: &[usize], l2: f64) -> f64 {
    let n = labels.len();
    let mut p = vec![0.0; b.len()];
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let xi = x.row(i);
        let lse = softmax_row(xi, w, b, &mut p);
        total += lse - (dot(w.row(y), xi) + b[y]);
    }
    total / n as f64 + 0.5 * l2 * w.as_slice().iter().map(|v| v * v).sum::<f64>()
}

/// Objective value and its gradient with respect to the weights and the bias.
pub fn objective(
    w: &DenseMatrix,
    b: &[f64],
    x: &DenseMatrix,
    labels: &[usize],
    l2: f64,
) -> (f64, DenseMatrix, Vec<f64>) {
    let n = labels.len();
    let k = b.len();
    let inv_n = 1.0 / n as f64;
    let mut gw = DenseMatrix::zeros(k, x.ncols());
    let mut gb = vec![0.0; k];
    let mut p = vec![0.0; k];
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let xi = x.row(i);
        let lse = softmax_row(xi, w, b, &mut p);
        total += lse - (dot(w.row(y), xi) + b[y]);
        p[y] -= 1.0;
        for c in 0..k {
            let coef = p[c] * inv_n;
            gb[c] += coef;
            for (g, v) in gw.row_mut(c).iter_mut().zip(xi) {
                *g += coef * v;
            }
        }
    }
    let mut reg = 0.0;
    for (g, v) in gw.as_mut_slice().iter_mut().zip(w.as_slice()) {
        *g += l2 * v;
        reg += v * v;
    }
    (total * inv_n + 0.5 * l2 * reg, gw, gb)
}

pub fn train_logreg(train: &RepresentationSet, cfg: &LogRegConfig) -> Result<TrainedClassifier> {
    let k = train.n_classes();
    let mut present = vec![false; k];
    for &l in train.labels() {
        present[l] = true;
    }
    if k < 2 || present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::SingleClass);
    }
    let x = train.vectors();
    let labels = train.labels();
    let d = train.dim();

    let mut w = DenseMatrix::zeros(k, d);
    let mut b = vec![0.0; k];
    let mut step = cfg.step;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let (mut loss, mut gw, mut gb) = objective(&w, &b, x, labels, cfg.l2);
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    history.push(loss);
    let mut gnorm = grad_norm(&gw, &gb);

    while iterations < cfg.max_iter {
        if gnorm < cfg.tol {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let w_try = axpy_matrix(&w, -step, &gw);
            let b_try: Vec<f64> = b.iter().zip(&gb).map(|(v, g)| v - step * g).collect();
            let trial = loss_only(&w_try, &b_try, x, labels, cfg.l2);
            if trial.is_finite() && trial <= loss - ARMIJO * step * gnorm * gnorm {
                accepted = Some((w_try, b_try));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, b_new)) = accepted else {
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { iteration: iterations });
            }
            // no representable step decreases the objective: stationary to working precision
            converged = true;
            break;
        };
        w = w_new;
        b = b_new;
        iterations += 1;
        (loss, gw, gb) = objective(&w, &b, x, labels, cfg.l2);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: iterations });
        }
        history.push(loss);
        gnorm = grad_norm(&gw, &gb);
        step *= 2.0;
    }
    if gnorm < cfg.tol {
        converged = true;
    }

    Ok(TrainedClassifier {
        weights: w,
        bias: b,
        meta: TrainingMeta {
            iterations,
            final_loss: loss,
            grad_norm: gnorm,
            converged,
            seed: cfg.seed,
            loss_history: history,
        },
    })
}

fn grad_norm(gw: &DenseMatrix, gb: &[f64]) -> f64 {
    (gw.as_slice().iter().map(|g| g * g).sum::<f64>() + gb.iter().map(|g| g * g).sum::<f64>()).sqrt()
}

fn axpy_matrix(w: &DenseMatrix, alpha: f64, g: &DenseMatrix) -> DenseMatrix {
    let data = w.as_slice().iter().zip(g.as_slice()).map(|(v, d)| v + alpha * d).collect();
    DenseMatrix::from_row_major(w.nrows(), w.ncols(), data).expect("shapes agree")
}

pub fn evaluate(clf: &TrainedClassifier, test: &RepresentationSet) -> Result<EvalResult> {
    if test.dim() != clf.dim() {
        return Err(Error::DimensionMismatch(format!(
            "classifier expects {} features, test set has {}",
            clf.dim(),
            test.dim()
        )));
    }
    let k = clf.n_classes().max(test.n_classes());
    let mut per_class = vec![(0usize, 0usize); k];
    let mut correct = 0;
    for (i, &y) in test.labels().iter().enumerate() {
        let hit = clf.predict(test.vectors().row(i)) == y;
        per_class[y].1 += 1;
        if hit {
            per_class[y].0 += 1;
            correct += 1;
        }
    }
    let n = test.len();
    Ok(EvalResult {
        accuracy: if n > 0 { correct as f64 / n as f64 } else { 0.0 },
        n_test: n,
        per_class,
    })
}
