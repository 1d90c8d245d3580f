//! Experiment runners: the density/loss grid, the representation-transfer study and
//! pairwise similarity scoring, each with its CSV writers.

mod density;
mod sts;
mod transfer;

pub use density::{
    run_density_grid, summarize, write_summary_csv, write_table1_csv, DensityExperimentConfig, DensityRun,
    NamedProfile, SummaryRow, TABLE1_HEADER, TABLE1_SUMMARY_HEADER,
};
pub use sts::{all_pairs, read_pairs, run_sts, write_sts_csv, PairScore, STS_HEADER};
pub use transfer::{
    binary_direct_vectors, default_datasets, fit_and_score, run_external, run_transfer, split_dataset,
    svd_score_vectors, write_baselines_csv, write_transfer_csv, BaselineRow, DatasetConfig, RepSpec,
    TransferExperimentConfig, TransferReport, TransferResultRow, BASELINE_HEADER, MAX_SPLIT_ATTEMPTS,
    TRANSFER_HEADER,
};
