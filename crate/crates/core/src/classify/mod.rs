//! Classifiers and similarity measures over sentence representations.

mod logreg;
mod representation;
mod similarity;
mod vcolumn;

pub use logreg::{
    evaluate, objective, train_logreg, EvalResult, LogRegConfig, TrainedClassifier, TrainingMeta,
};
pub use representation::{stratified_split, RepKind, RepresentationSet};
pub use similarity::{cosine, cosine_dense, cosine_product_norm, pair_features};
pub use vcolumn::{v_column_classifier, v_column_scores, Direction, VColumnClassifier};
