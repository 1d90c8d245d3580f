use crate::classify::{evaluate, stratified_split, train_logreg, LogRegConfig, RepKind, RepresentationSet};
use crate::dense::{DenseBudget, DenseMatrix};
use crate::error::{Error, Result};
use crate::exec;
use crate::factorization::{svd_truncated, Factorization, RandomizedParams, SvdMethod, SvdOptions};
use crate::labelmatrix::{embed_datasets, generate, DatasetSpec, DensityProfile, LabelMatrix};
use crate::seed::RngSeed;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const TRANSFER_HEADER: &str = "dataset,rep,dim,density,seed,accuracy,coverage_pct,n_classes";
pub const BASELINE_HEADER: &str = "dataset,seed,n_train,n_test,majority_baseline";

/// Attempts at drawing a split whose training part holds at least two classes.
pub const MAX_SPLIT_ATTEMPTS: u64 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub n_examples: usize,
    pub n_classes: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.8
}

impl DatasetConfig {
    pub fn new(name: &str, n_examples: usize, n_classes: usize) -> Self {
        Self {
            name: name.to_string(),
            n_examples,
            n_classes,
            train_fraction: default_train_fraction(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub kind: RepKind,
    pub dim: usize,
}

/// A grid of transfer runs: every density × representation × dataset × seed.
///
/// Datasets sit in consecutive rows from row 0 and own consecutive class columns from
/// column 0, in config order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferExperimentConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    pub densities: Vec<f64>,
    pub reps: Vec<RepSpec>,
    pub datasets: Vec<DatasetConfig>,
    pub seeds: Vec<RngSeed>,
    #[serde(default)]
    pub logreg: LogRegConfig,
    /// Sketch settings; the seed field is replaced by one derived from each run seed.
    #[serde(default)]
    pub svd: RandomizedParams,
    #[serde(default)]
    pub budget: DenseBudget,
}

impl Default for TransferExperimentConfig {
    fn default() -> Self {
        let rep = |kind, dim| RepSpec { kind, dim };
        Self {
            n_rows: 7000,
            n_cols: 12000,
            densities: vec![0.5, 0.01],
            reps: vec![
                rep(RepKind::BinaryDirect, 40),
                rep(RepKind::SvdScores, 4000),
                rep(RepKind::SvdScores, 400),
                rep(RepKind::SvdScores, 40),
            ],
            datasets: default_datasets(7000),
            seeds: vec![RngSeed(0)],
            logreg: LogRegConfig::default(),
            svd: RandomizedParams::default(),
            budget: DenseBudget::DEFAULT,
        }
    }
}

/// Six stand-in tasks whose row shares and class counts follow common sentence
/// classification benchmarks: four binary tasks, one 5-way and one 6-way.
pub fn default_datasets(n_rows: usize) -> Vec<DatasetConfig> {
    [("cr", 0.057, 2), ("mr", 0.157, 2), ("mpqa", 0.157, 2), ("subj", 0.143, 2), ("sst5", 0.171, 5), ("trec", 0.086, 6)]
        .into_iter()
        .map(|(name, share, k)| DatasetConfig::new(name, (share * n_rows as f64).round() as usize, k))
        .collect()
}

impl TransferExperimentConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_rows == 0 || self.n_cols == 0 {
            return bad("matrix must be non-empty".into());
        }
        if self.seeds.is_empty() || self.densities.is_empty() || self.reps.is_empty() || self.datasets.is_empty() {
            return bad("seeds, densities, reps and datasets must each be non-empty".into());
        }
        if let Some(d) = self.densities.iter().find(|&&d| !(d > 0.0 && d < 1.0)) {
            return bad(format!("density {d} outside (0, 1)"));
        }
        let rows: usize = self.datasets.iter().map(|d| d.n_examples).sum();
        let cols: usize = self.datasets.iter().map(|d| d.n_classes).sum();
        if rows > self.n_rows {
            return bad(format!("datasets need {rows} rows, matrix has {}", self.n_rows));
        }
        if cols > self.n_cols {
            return bad(format!("datasets need {cols} class columns, matrix has {}", self.n_cols));
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("dataset names must be unique".into());
        }
        for d in &self.datasets {
            if d.n_classes < 2 || d.n_examples < 2 * d.n_classes {
                return bad(format!("{}: need ≥2 classes and ≥2 examples per class", d.name));
            }
            if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
                return bad(format!("{}: train_fraction outside (0, 1)", d.name));
            }
        }
        let max_rank = self.n_rows.min(self.n_cols);
        let noise_cols = self.n_cols - cols;
        for r in &self.reps {
            match r.kind {
                RepKind::BinaryDirect => {
                    if let Some(d) = self.datasets.iter().find(|d| r.dim < d.n_classes || r.dim - d.n_classes > noise_cols) {
                        return bad(format!(
                            "binary dim {} does not fit dataset {} ({} classes, {noise_cols} noise columns)",
                            r.dim, d.name, d.n_classes
                        ));
                    }
                }
                RepKind::SvdScores => {
                    if r.dim == 0 || r.dim > max_rank {
                        return Err(Error::RankOutOfRange { rank: r.dim, max: max_rank });
                    }
                }
                RepKind::External => return bad("external vectors are not part of a transfer grid".into()),
            }
        }
        Ok(())
    }

    /// Dataset layouts for one seed.
    pub fn dataset_specs(&self, seed: RngSeed) -> Result<Vec<DatasetSpec>> {
        let mut row = 0;
        let mut col = 0;
        self.datasets
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let spec = DatasetSpec::with_random_labels(
                    d.name.clone(),
                    row,
                    d.n_examples,
                    (col..col + d.n_classes).collect(),
                    seed.child("labels", i as u64),
                )?;
                row += d.n_examples;
                col += d.n_classes;
                Ok(spec)
            })
            .collect()
    }

    fn class_columns(&self) -> usize {
        self.datasets.iter().map(|d| d.n_classes).sum()
    }
}

/// One (dataset, representation, density, seed) outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferResultRow {
    pub dataset: String,
    pub rep: RepKind,
    pub dim: usize,
    /// Absent for external vectors.
    pub density: Option<f64>,
    pub seed: RngSeed,
    pub accuracy: f64,
    /// Dataset rows over matrix rows, in percent. Absent for external vectors.
    pub coverage_pct: Option<f64>,
    pub n_classes: usize,
}

/// Share of the test split held by its most common class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineRow {
    pub dataset: String,
    pub seed: RngSeed,
    pub n_train: usize,
    pub n_test: usize,
    pub majority_baseline: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransferReport {
    pub results: Vec<TransferResultRow>,
    pub baselines: Vec<BaselineRow>,
}

/// Seeded stratified split, redrawn while the training part holds fewer than two
/// classes.
pub fn split_dataset(
    labels: &[usize],
    n_classes: usize,
    train_fraction: f64,
    seed: RngSeed,
) -> Result<(Vec<usize>, Vec<usize>)> {
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let (train, test) = stratified_split(labels, n_classes, train_fraction, seed.child("split", attempt));
        let mut seen = vec![false; n_classes];
        for &i in &train {
            seen[labels[i]] = true;
        }
        if seen.iter().filter(|&&s| s).count() >= 2 && !test.is_empty() {
            return Ok((train, test));
        }
    }
    Err(Error::SingleClass)
}

/// Example rows restricted to `dim` columns: the dataset's class columns first, then the
/// leading `dim − k` columns outside every dataset's class block.
pub fn binary_direct_vectors(m: &LabelMatrix, spec: &DatasetSpec, first_free_col: usize, dim: usize) -> DenseMatrix {
    let k = spec.n_classes();
    let mut out = DenseMatrix::zeros(spec.n_examples(), dim);
    let noise_end = (first_free_col + dim - k) as u32;
    for (e, r) in spec.rows().enumerate() {
        let row = out.row_mut(e);
        for &c in m.row(r) {
            if let Some(pos) = spec.class_columns.iter().position(|&cc| cc == c as usize) {
                row[pos] = 1.0;
            } else if c as usize >= first_free_col && c < noise_end {
                row[k + c as usize - first_free_col] = 1.0;
            }
        }
    }
    out
}

/// Rows of `U_r Σ_r` belonging to the dataset.
pub fn svd_score_vectors(f: &Factorization, spec: &DatasetSpec, dim: usize) -> DenseMatrix {
    DenseMatrix::from_fn(spec.n_examples(), dim, |e, j| {
        f.u()[(spec.row_start + e, j)] * f.sigma()[j]
    })
}

/// Trains on the split's training part and returns test accuracy.
pub fn fit_and_score(set: &RepresentationSet, train: &[usize], test: &[usize], cfg: &LogRegConfig) -> Result<f64> {
    let clf = train_logreg(&set.subset(train), cfg)?;
    Ok(evaluate(&clf, &set.subset(test))?.accuracy)
}

struct Job<'a> {
    spec: &'a DatasetSpec,
    rep: RepSpec,
    split: &'a (Vec<usize>, Vec<usize>),
}

pub fn run_transfer(cfg: &TransferExperimentConfig) -> Result<TransferReport> {
    cfg.check()?;
    let mut report = TransferReport::default();
    let free_col = cfg.class_columns();
    let max_svd_dim = cfg
        .reps
        .iter()
        .filter(|r| r.kind == RepKind::SvdScores)
        .map(|r| r.dim)
        .max();

    for &seed in &cfg.seeds {
        let specs = cfg.dataset_specs(seed)?;
        let splits: Vec<(Vec<usize>, Vec<usize>)> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| split_dataset(&s.labels, s.n_classes(), cfg.datasets[i].train_fraction, seed.child("dataset", i as u64)))
            .collect::<Result<_>>()?;
        for (spec, (train, test)) in specs.iter().zip(&splits) {
            let test_labels: Vec<usize> = test.iter().map(|&i| spec.labels[i]).collect();
            let mut counts = vec![0usize; spec.n_classes()];
            for &l in &test_labels {
                counts[l] += 1;
            }
            report.baselines.push(BaselineRow {
                dataset: spec.name.clone(),
                seed,
                n_train: train.len(),
                n_test: test.len(),
                majority_baseline: *counts.iter().max().unwrap() as f64 / test.len() as f64,
            });
        }

        for &density in &cfg.densities {
            let tag = density.to_bits();
            log::info!("transfer: seed {seed} density {density}: generating");
            let profile = DensityProfile::uniform(density)?;
            let raw = generate(cfg.n_rows, cfg.n_cols, &profile, seed.child("matrix", tag))?;
            let m = embed_datasets(&raw.matrix, &specs)?;
            drop(raw);
            let f = match max_svd_dim {
                Some(r) => {
                    log::info!("transfer: seed {seed} density {density}: rank-{r} randomized SVD");
                    let opts = SvdOptions {
                        budget: cfg.budget,
                        randomized: RandomizedParams {
                            seed: seed.child("sketch", tag),
                            ..cfg.svd
                        },
                    };
                    Some(svd_truncated(&m, r, SvdMethod::Randomized, &opts)?)
                }
                None => None,
            };

            let jobs: Vec<Job> = specs
                .iter()
                .zip(&splits)
                .flat_map(|(spec, split)| cfg.reps.iter().map(move |&rep| Job { spec, rep, split }))
                .collect();
            let rows = exec::try_map_slice(&jobs, |job| -> Result<TransferResultRow> {
                let vectors = match job.rep.kind {
                    RepKind::BinaryDirect => binary_direct_vectors(&m, job.spec, free_col, job.rep.dim),
                    _ => svd_score_vectors(f.as_ref().expect("svd computed"), job.spec, job.rep.dim),
                };
                let set = RepresentationSet::new(vectors, job.spec.labels.clone(), job.spec.n_classes(), job.rep.kind)?;
                let accuracy = fit_and_score(&set, &job.split.0, &job.split.1, &cfg.logreg)?;
                log::debug!("{} {} {} {density}: {accuracy}", job.spec.name, job.rep.kind.as_str(), job.rep.dim);
                Ok(TransferResultRow {
                    dataset: job.spec.name.clone(),
                    rep: job.rep.kind,
                    dim: job.rep.dim,
                    density: Some(density),
                    seed,
                    accuracy,
                    coverage_pct: Some(job.spec.n_examples() as f64 / cfg.n_rows as f64 * 100.0),
                    n_classes: job.spec.n_classes(),
                })
            })?;
            report.results.extend(rows);
        }
    }
    sort_report(&mut report);
    Ok(report)
}

/// Train/test on externally supplied vectors with the same split and trainer.
pub fn run_external(
    name: &str,
    set: &RepresentationSet,
    train_fraction: f64,
    seed: RngSeed,
    logreg: &LogRegConfig,
) -> Result<TransferReport> {
    let (train, test) = split_dataset(set.labels(), set.n_classes(), train_fraction, seed.child("dataset", 0))?;
    let accuracy = fit_and_score(set, &train, &test, logreg)?;
    Ok(TransferReport {
        results: vec![TransferResultRow {
            dataset: name.to_string(),
            rep: RepKind::External,
            dim: set.dim(),
            density: None,
            seed,
            accuracy,
            coverage_pct: None,
            n_classes: set.n_classes(),
        }],
        baselines: vec![BaselineRow {
            dataset: name.to_string(),
            seed,
            n_train: train.len(),
            n_test: test.len(),
            majority_baseline: set.subset(&test).majority_fraction(),
        }],
    })
}

fn sort_report(r: &mut TransferReport) {
    r.results.sort_by(|a, b| {
        (&a.dataset, a.seed, a.rep, a.dim)
            .cmp(&(&b.dataset, b.seed, b.rep, b.dim))
            .then(a.density.unwrap_or(0.0).total_cmp(&b.density.unwrap_or(0.0)))
    });
    r.baselines.sort_by(|a, b| (&a.dataset, a.seed).cmp(&(&b.dataset, b.seed)));
}

pub fn write_transfer_csv<W: Write>(w: W, rows: &[TransferResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRANSFER_HEADER.split(','))?;
    for r in rows {
        out.write_record([
            r.dataset.clone(),
            r.rep.as_str().to_string(),
            r.dim.to_string(),
            r.density.map_or(String::new(), |d| d.to_string()),
            r.seed.to_string(),
            r.accuracy.to_string(),
            r.coverage_pct.map_or(String::new(), |c| c.to_string()),
            r.n_classes.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_baselines_csv<W: Write>(w: W, rows: &[BaselineRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BASELINE_HEADER.split(','))?;
    for r in rows {
        out.write_record([
            r.dataset.clone(),
            r.seed.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
            r.majority_baseline.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
