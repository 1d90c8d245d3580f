//! Command implementations. Each takes its fully resolved config table, so a run
//! launched from flags and one replayed from a manifest go through the same code.

use anyhow::{bail, ensure, Context, Result};
use labelrank::classify::RepresentationSet;
use labelrank::experiments::{
    all_pairs, read_pairs, run_density_grid, run_external, run_sts, run_transfer, summarize, write_baselines_csv,
    write_sts_csv, write_summary_csv, write_table1_csv, write_transfer_csv, DensityExperimentConfig, NamedProfile,
    TransferExperimentConfig,
};
use labelrank::factorization::{spectrum, svd_truncated, RandomizedParams, SpectrumReport};
use labelrank::labelmatrix::{generate, validate, Assignment};
use labelrank::{DenseBudget, LabelMatrix, RngSeed, SvdMethod, SvdOptions};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmd {
    Generate,
    Validate,
    Factor,
    Spectrum,
    Table1,
    Transfer,
    Sts,
}

impl Cmd {
    pub const ALL: [Cmd; 7] = [Cmd::Generate, Cmd::Validate, Cmd::Factor, Cmd::Spectrum, Cmd::Table1, Cmd::Transfer, Cmd::Sts];

    pub fn name(self) -> &'static str {
        match self {
            Cmd::Generate => "generate",
            Cmd::Validate => "validate",
            Cmd::Factor => "factor",
            Cmd::Spectrum => "spectrum",
            Cmd::Table1 => "table1",
            Cmd::Transfer => "transfer",
            Cmd::Sts => "sts",
        }
    }

    pub fn from_name(name: &str) -> Option<Cmd> {
        Cmd::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Files a command read and wrote. Outputs are relative to the output directory.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub rows: usize,
    pub cols: usize,
    pub profile: NamedProfile,
    pub assignment: Option<Assignment>,
    pub output: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub input: PathBuf,
    pub output: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    pub input: PathBuf,
    pub rank: usize,
    pub method: SvdMethod,
    pub randomized: RandomizedParams,
    pub budget: DenseBudget,
    /// Output names are `<prefix>_u.txt`, `<prefix>_sigma.txt`, `<prefix>_v.txt`.
    pub prefix: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub input: PathBuf,
    /// Leading values to keep; all of them when absent.
    pub k: Option<usize>,
    pub with_sigma_cdf: bool,
    pub budget: DenseBudget,
    pub output: String,
}


/// Vectors from a CSV file, scored instead of a synthetic grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    pub path: PathBuf,
    pub name: String,
    pub train_fraction: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StsConfig {
    pub input: PathBuf,
    /// CSV of `row_a,row_b`; every unordered pair when absent.
    pub pairs: Option<PathBuf>,
    pub product_norm: bool,
    pub output: String,
}

fn to_table<T: Serialize>(value: &T) -> toml::Table {
    toml::Table::try_from(value).expect("config types serialize to tables")
}

/// Built-in defaults for a command as a config table. Keys that have no sensible
/// default (matrix sizes for `generate`, input paths) are left out.
pub fn defaults(cmd: Cmd, seed: RngSeed) -> toml::Table {
    let mut t = toml::Table::new();
    match cmd {
        Cmd::Generate => {
            t.insert("profile".into(), "table1-even".into());
            t.insert("output".into(), "matrix.txt".into());
        }
        Cmd::Validate => {
            t.insert("output".into(), "validation.json".into());
        }
        Cmd::Factor => {
            t.insert("method".into(), "exact".into());
            let params = RandomizedParams {
                seed: seed.child("sketch", 0),
                ..Default::default()
            };
            t.insert("randomized".into(), to_table(&params).into());
            t.insert("budget".into(), to_value(&DenseBudget::DEFAULT));
            t.insert("prefix".into(), "factor".into());
        }
        Cmd::Spectrum => {
            t.insert("with_sigma_cdf".into(), false.into());
            t.insert("budget".into(), to_value(&DenseBudget::DEFAULT));
            t.insert("output".into(), "spectrum.csv".into());
        }
        Cmd::Table1 => {
            t = to_table(&DensityExperimentConfig {
                seeds: seed.trials(5),
                ..Default::default()
            });
            t.insert("with_sigma_cdf".into(), false.into());
        }
        Cmd::Transfer => {
            let cfg = TransferExperimentConfig {
                seeds: seed.trials(1),
                ..Default::default()
            };
            t = to_table(&cfg);
        }
        Cmd::Sts => {
            t.insert("product_norm".into(), false.into());
            t.insert("output".into(), "sts.csv".into());
        }
    }
    t
}

pub fn to_value<T: Serialize>(value: &T) -> toml::Value {
    toml::Value::try_from(value).expect("serializable")
}

fn parse<T: DeserializeOwned>(cmd: Cmd, table: &toml::Table) -> Result<T> {
    toml::Value::Table(table.clone())
        .try_into()
        .with_context(|| format!("invalid {} config", cmd.name()))
}

fn read_matrix(path: &Path) -> Result<LabelMatrix> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    LabelMatrix::read_text(BufReader::new(f)).with_context(|| format!("reading matrix {}", path.display()))
}

fn create(out_dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    let path = out_dir.join(name);
    let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(mut w: BufWriter<fs::File>) -> Result<()> {
    w.flush()?;
    w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    Ok(())
}

fn safe_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Table-1 tables carry one key beyond the grid config.
fn split_table1(table: &toml::Table) -> Result<(DensityExperimentConfig, bool)> {
    let mut grid = table.clone();
    let with_sigma_cdf = match grid.remove("with_sigma_cdf") {
        Some(v) => v.as_bool().context("table1.with_sigma_cdf must be a boolean")?,
        None => false,
    };
    Ok((parse(Cmd::Table1, &grid)?, with_sigma_cdf))
}

/// Transfer tables may carry an `external` sub-table, which switches the command to
/// scoring those vectors with the grid's trainer settings and first seed.
fn split_transfer(table: &toml::Table) -> Result<(TransferExperimentConfig, Option<ExternalConfig>)> {
    let mut grid = table.clone();
    let external = match grid.remove("external") {
        Some(v) => Some(v.try_into().context("invalid transfer.external config")?),
        None => None,
    };
    Ok((parse(Cmd::Transfer, &grid)?, external))
}

pub fn execute(cmd: Cmd, table: &toml::Table, seed: RngSeed, out_dir: &Path) -> Result<Outcome> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut outcome = Outcome::default();
    match cmd {
        Cmd::Generate => {
            let cfg: GenerateConfig = parse(cmd, table)?;
            let mut profile = cfg.profile.profile.clone();
            if let Some(a) = cfg.assignment {
                profile = profile.with_assignment(a);
            }
            let g = generate(cfg.rows, cfg.cols, &profile, seed)?;
            let mut w = create(out_dir, &cfg.output)?;
            g.matrix.write_text(&mut w)?;
            finish(w)?;
            let back = read_matrix(&out_dir.join(&cfg.output))?;
            ensure!(back == g.matrix, "matrix file did not read back identically");
            println!(
                "generated {}x{} matrix with {} ones ({}) -> {}",
                cfg.rows,
                cfg.cols,
                g.matrix.nnz(),
                cfg.profile.name,
                cfg.output
            );
            outcome.outputs.push(cfg.output.into());
        }
        Cmd::Validate => {
            let cfg: ValidateConfig = parse(cmd, table)?;
            let m = read_matrix(&cfg.input)?;
            let report = validate(&m);
            let mut w = create(out_dir, &cfg.output)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            w.write_all(b"\n")?;
            finish(w)?;
            println!(
                "{}: {} empty rows, {} empty columns, {} duplicate rows, {} duplicate columns{}",
                cfg.input.display(),
                report.empty_rows.len(),
                report.empty_cols.len(),
                report.duplicate_rows.len(),
                report.duplicate_cols.len(),
                if report.is_valid() { " (valid)" } else { "" }
            );
            outcome.inputs.push(cfg.input);
            outcome.outputs.push(cfg.output.into());
        }
        Cmd::Factor => {
            let cfg: FactorConfig = parse(cmd, table)?;
            let m = read_matrix(&cfg.input)?;
            let opts = SvdOptions {
                budget: cfg.budget,
                randomized: cfg.randomized,
            };
            let f = svd_truncated(&m, cfg.rank, cfg.method, &opts)?;
            let names = ["u", "sigma", "v"].map(|p| format!("{}_{p}.txt", cfg.prefix));
            let (mut u, mut s, mut v) = (create(out_dir, &names[0])?, create(out_dir, &names[1])?, create(out_dir, &names[2])?);
            f.write_text(&mut u, &mut s, &mut v)?;
            for w in [u, s, v] {
                finish(w)?;
            }
            println!("rank-{} {} SVD of {}: sigma_1 = {}", cfg.rank, cfg.method.as_str(), cfg.input.display(), f.sigma()[0]);
            outcome.inputs.push(cfg.input);
            outcome.outputs.extend(names.map(PathBuf::from));
        }
        Cmd::Spectrum => {
            let cfg: SpectrumConfig = parse(cmd, table)?;
            let m = read_matrix(&cfg.input)?;
            let k = cfg.k.unwrap_or(m.n_rows().min(m.n_cols()));
            let report = spectrum(&m, k, cfg.budget)?;
            write_spectrum(out_dir, &cfg.output, &report, cfg.with_sigma_cdf)?;
            println!("{} singular values of {} -> {}", k, cfg.input.display(), cfg.output);
            outcome.inputs.push(cfg.input);
            outcome.outputs.push(cfg.output.into());
        }
        Cmd::Table1 => {
            let (grid, with_sigma_cdf) = split_table1(table)?;
            let runs = run_density_grid(&grid)?;
            let mut w = create(out_dir, "table1.csv")?;
            write_table1_csv(&mut w, &runs)?;
            finish(w)?;
            let summary = summarize(&runs);
            let mut w = create(out_dir, "table1_summary.csv")?;
            write_summary_csv(&mut w, &summary)?;
            finish(w)?;
            outcome.outputs.extend(["table1.csv", "table1_summary.csv"].map(PathBuf::from));
            for run in &runs {
                let name = format!("spectrum_{}_{}.csv", safe_name(&run.profile), run.seed);
                write_spectrum(out_dir, &name, &run.spectrum, with_sigma_cdf)?;
                outcome.outputs.push(name.into());
            }
            for r in &summary {
                println!(
                    "{:<20} density {:<6} coverage {:<8.4} mean loss {:>9.3} (row std {:.3}, seed std {:.3}, {} seeds)",
                    r.profile, r.density, r.coverage, r.mean_loss, r.std_loss, r.seed_std, r.n_seeds
                );
            }
        }
        Cmd::Transfer => {
            let (cfg, external) = split_transfer(table)?;
            let report = match external {
                Some(ext) => {
                    let f = fs::File::open(&ext.path).with_context(|| format!("opening {}", ext.path.display()))?;
                    let (_, set) = RepresentationSet::read_csv(BufReader::new(f))?;
                    outcome.inputs.push(ext.path.clone());
                    let seed = cfg.seeds.first().copied().unwrap_or(seed);
                    run_external(&ext.name, &set, ext.train_fraction, seed, &cfg.logreg)?
                }
                None => run_transfer(&cfg)?,
            };
            let mut w = create(out_dir, "transfer.csv")?;
            write_transfer_csv(&mut w, &report.results)?;
            finish(w)?;
            let mut w = create(out_dir, "transfer_baselines.csv")?;
            write_baselines_csv(&mut w, &report.baselines)?;
            finish(w)?;
            for r in &report.results {
                println!(
                    "{:<8} {:<8} dim {:>5} density {:<6} accuracy {:.4}",
                    r.dataset,
                    r.rep.as_str(),
                    r.dim,
                    r.density.map_or("-".to_string(), |d| d.to_string()),
                    r.accuracy
                );
            }
            outcome.outputs.extend(["transfer.csv", "transfer_baselines.csv"].map(PathBuf::from));
        }
        Cmd::Sts => {
            let cfg: StsConfig = parse(cmd, table)?;
            let m = read_matrix(&cfg.input)?;
            let pairs = match &cfg.pairs {
                Some(p) => {
                    let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
                    outcome.inputs.push(p.clone());
                    read_pairs(BufReader::new(f))?
                }
                None => all_pairs(m.n_rows()),
            };
            let scores = run_sts(&m, &pairs, cfg.product_norm)?;
            let mut w = create(out_dir, &cfg.output)?;
            write_sts_csv(&mut w, &scores)?;
            finish(w)?;
            println!("{} pairs scored -> {}", scores.len(), cfg.output);
            outcome.inputs.insert(0, cfg.input);
            outcome.outputs.push(cfg.output.into());
        }
    }
    Ok(outcome)
}

fn write_spectrum(out_dir: &Path, name: &str, report: &SpectrumReport, with_sigma_cdf: bool) -> Result<()> {
    let mut w = create(out_dir, name)?;
    report.write_csv(&mut w, with_sigma_cdf)?;
    finish(w)
}

/// Checks a resolved table before anything runs, so bad configs fail fast and
/// missing required keys can be reported as usage errors.
pub fn missing_required(cmd: Cmd, table: &toml::Table) -> Option<&'static str> {
    let required: &[&str] = match cmd {
        Cmd::Generate => &["rows", "cols"],
        Cmd::Validate | Cmd::Spectrum | Cmd::Sts => &["input"],
        Cmd::Factor => &["input", "rank"],
        Cmd::Table1 | Cmd::Transfer => &[],
    };
    required.iter().copied().find(|k| !table.contains_key(*k))
}

pub fn check(cmd: Cmd, table: &toml::Table) -> Result<()> {
    match cmd {
        Cmd::Generate => check_output_name(&parse::<GenerateConfig>(cmd, table)?.output),
        Cmd::Validate => check_output_name(&parse::<ValidateConfig>(cmd, table)?.output),
        Cmd::Factor => check_output_name(&parse::<FactorConfig>(cmd, table)?.prefix),
        Cmd::Spectrum => check_output_name(&parse::<SpectrumConfig>(cmd, table)?.output),
        Cmd::Table1 => Ok(split_table1(table)?.0.check()?),
        Cmd::Transfer => match split_transfer(table)? {
            (cfg, None) => Ok(cfg.check()?),
            (_, Some(ext)) => {
                ensure!(ext.train_fraction > 0.0 && ext.train_fraction < 1.0, "train_fraction outside (0, 1)");
                Ok(())
            }
        },
        Cmd::Sts => check_output_name(&parse::<StsConfig>(cmd, table)?.output),
    }
}

/// Output names must stay inside the output directory.
fn check_output_name(name: &str) -> Result<()> {
    let p = Path::new(name);
    if name.is_empty() || p.is_absolute() || p.components().count() != 1 {
        bail!("output name {name:?} must be a plain file name");
    }
    Ok(())
}
