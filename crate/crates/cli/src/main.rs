//! `labelrank`: generate label matrices, factor them and run the density-loss and
//! transfer experiments. Every run leaves a `<command>.manifest.toml` next to its
//! outputs; `labelrank rerun <manifest>` replays it and checks the outputs match.

mod commands;
mod config;
mod manifest;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use commands::{Cmd, Outcome};
use config::{absolutize, merge, ConfigFile};
use labelrank::classify::RepKind;
use labelrank::experiments::{DatasetConfig, RepSpec};
use labelrank::labelmatrix::Assignment;
use labelrank::{RngSeed, SvdMethod};
use manifest::{FileRecord, RunManifest};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use toml::{Table, Value};

#[derive(Parser, Debug)]
#[command(name = "labelrank", version, about = "Low-rank label-matrix experiments")]
struct Cli {
    /// Command seed; every random draw derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for data-parallel loops. Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML file with a table per command; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random label matrix.
    Generate(GenerateArgs),
    /// Report empty and duplicate rows and columns of a matrix file.
    Validate(ValidateArgs),
    /// Truncated SVD of a matrix file.
    Factor(FactorArgs),
    /// Singular values and cumulative energy of a matrix file.
    Spectrum(SpectrumArgs),
    /// Row reconstruction loss by density group over profiles and seeds.
    Table1(Table1Args),
    /// Downstream accuracy of binary and SVD representations.
    Transfer(TransferArgs),
    /// Label-overlap cosine between row pairs.
    Sts(StsArgs),
    /// Replay a run manifest and check its outputs are reproduced byte for byte.
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Built-in profile: table1-skew-sparse, table1-even or table1-skew-dense.
    #[arg(long, conflicts_with = "density")]
    profile: Option<String>,
    /// One density for every row instead of a profile.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_parser = parse_assignment)]
    assignment: Option<Assignment>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct SketchArgs {
    #[arg(long)]
    oversampling: Option<usize>,
    #[arg(long)]
    power_iterations: Option<usize>,
    /// Run products on the sparse pattern below this fill fraction.
    #[arg(long)]
    sparse_below_density: Option<f64>,
}

#[derive(Args, Debug)]
struct FactorArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, value_parser = parse_method)]
    method: Option<SvdMethod>,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Seed of the sketch test matrix (derived from --seed by default).
    #[arg(long)]
    sketch_seed: Option<u64>,
    /// Largest dense matrix allowed, in elements.
    #[arg(long)]
    dense_budget: Option<usize>,
    #[arg(long)]
    prefix: Option<String>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Add a `cumulative_sigma` column (running Σσ over total Σσ).
    #[arg(long)]
    with_sigma_cdf: bool,
    #[arg(long)]
    dense_budget: Option<usize>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated built-in profile names.
    #[arg(long, value_delimiter = ',')]
    profiles: Option<Vec<String>>,
    /// Number of trial seeds derived from --seed.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    spectrum_len: Option<usize>,
    #[arg(long)]
    with_sigma_cdf: bool,
    #[arg(long)]
    dense_budget: Option<usize>,
}

#[derive(Args, Debug)]
struct TransferArgs {
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Comma-separated cell densities.
    #[arg(long, value_delimiter = ',')]
    density: Option<Vec<f64>>,
    /// Comma-separated representations (binary, svd); crossed with --dim.
    #[arg(long, value_delimiter = ',', value_parser = parse_rep, requires = "dim")]
    rep: Option<Vec<RepKind>>,
    /// Comma-separated representation sizes; crossed with --rep.
    #[arg(long, value_delimiter = ',', requires = "rep")]
    dim: Option<Vec<usize>>,
    /// Dataset as name:examples:classes; repeat for several.
    #[arg(long, value_parser = parse_dataset)]
    dataset: Option<Vec<DatasetConfig>>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Number of trial seeds derived from --seed.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    sketch: SketchArgs,
    #[arg(long)]
    dense_budget: Option<usize>,
    /// Score vectors from an `id,label,v0,...` CSV instead of the synthetic grid.
    #[arg(long)]
    external: Option<PathBuf>,
    #[arg(long, requires = "external")]
    external_name: Option<String>,
}

#[derive(Args, Debug)]
struct StsArgs {
    input: Option<PathBuf>,
    /// CSV of row_a,row_b pairs; all pairs when omitted.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Divide shared labels by the product of label counts instead of its root.
    #[arg(long = "paper-literal")]
    product_norm: bool,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct RerunArgs {
    manifest: PathBuf,
}

fn parse_assignment(s: &str) -> Result<Assignment, String> {
    Value::String(s.into()).try_into().map_err(|_| "expected contiguous-blocks or seeded-shuffle".into())
}

fn parse_method(s: &str) -> Result<SvdMethod, String> {
    Value::String(s.into()).try_into().map_err(|_| "expected exact or randomized".into())
}

fn parse_rep(s: &str) -> Result<RepKind, String> {
    match s.parse() {
        Ok(RepKind::External) | Err(_) => Err("expected binary or svd".into()),
        Ok(k) => Ok(k),
    }
}

fn parse_dataset(s: &str) -> Result<DatasetConfig, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [name, n, k] = parts[..] else {
        return Err("expected name:examples:classes".into());
    };
    let n = n.parse().map_err(|_| format!("bad example count {n:?}"))?;
    let k = k.parse().map_err(|_| format!("bad class count {k:?}"))?;
    Ok(DatasetConfig::new(name, n, k))
}

fn set<T: serde::Serialize>(t: &mut Table, key: &str, v: Option<T>) {
    if let Some(v) = v {
        t.insert(key.into(), commands::to_value(&v));
    }
}

fn path_value(p: &Path) -> Result<Value> {
    Ok(std::path::absolute(p)?.to_string_lossy().into_owned().into())
}

impl SketchArgs {
    fn table(&self) -> Table {
        let mut t = Table::new();
        set(&mut t, "oversampling", self.oversampling);
        set(&mut t, "power_iterations", self.power_iterations);
        set(&mut t, "sparse_below_density", self.sparse_below_density);
        t
    }
}

/// Flag overrides for a command as a config table.
fn flag_table(command: &Command, seed: RngSeed) -> Result<(Cmd, Table)> {
    let mut t = Table::new();
    let cmd = match command {
        Command::Generate(a) => {
            set(&mut t, "rows", a.rows);
            set(&mut t, "cols", a.cols);
            set(&mut t, "profile", a.profile.clone());
            if let Some(d) = a.density {
                let mut p = Table::new();
                p.insert("name".into(), format!("uniform-{d}").into());
                p.insert("groups".into(), Value::Array(vec![toml::toml! { density = d
                coverage = 1.0 }
                .into()]));
                p.insert("assignment".into(), "contiguous-blocks".into());
                t.insert("profile".into(), p.into());
            }
            set(&mut t, "assignment", a.assignment);
            set(&mut t, "output", a.output.clone());
            Cmd::Generate
        }
        Command::Validate(a) => {
            if let Some(p) = &a.input {
                t.insert("input".into(), path_value(p)?);
            }
            set(&mut t, "output", a.output.clone());
            Cmd::Validate
        }
        Command::Factor(a) => {
            if let Some(p) = &a.input {
                t.insert("input".into(), path_value(p)?);
            }
            set(&mut t, "rank", a.rank);
            set(&mut t, "method", a.method);
            let mut r = a.sketch.table();
            set(&mut r, "seed", a.sketch_seed.map(RngSeed));
            if !r.is_empty() {
                t.insert("randomized".into(), r.into());
            }
            set(&mut t, "budget", a.dense_budget);
            set(&mut t, "prefix", a.prefix.clone());
            Cmd::Factor
        }
        Command::Spectrum(a) => {
            if let Some(p) = &a.input {
                t.insert("input".into(), path_value(p)?);
            }
            set(&mut t, "k", a.k);
            set(&mut t, "with_sigma_cdf", a.with_sigma_cdf.then_some(true));
            set(&mut t, "budget", a.dense_budget);
            set(&mut t, "output", a.output.clone());
            Cmd::Spectrum
        }
        Command::Table1(a) => {
            set(&mut t, "n_rows", a.rows);
            set(&mut t, "n_cols", a.cols);
            set(&mut t, "rank", a.rank);
            set(&mut t, "profiles", a.profiles.clone());
            set(&mut t, "seeds", a.seeds.map(|n| seed.trials(n)));
            set(&mut t, "spectrum_len", a.spectrum_len);
            set(&mut t, "with_sigma_cdf", a.with_sigma_cdf.then_some(true));
            set(&mut t, "budget", a.dense_budget);
            Cmd::Table1
        }
        Command::Transfer(a) => {
            set(&mut t, "n_rows", a.rows);
            set(&mut t, "n_cols", a.cols);
            set(&mut t, "densities", a.density.clone());
            if let (Some(kinds), Some(dims)) = (&a.rep, &a.dim) {
                let reps: Vec<RepSpec> = kinds
                    .iter()
                    .flat_map(|&kind| dims.iter().map(move |&dim| RepSpec { kind, dim }))
                    .collect();
                set(&mut t, "reps", Some(reps));
            }
            set(&mut t, "datasets", a.dataset.clone());
            set(&mut t, "seeds", a.seeds.map(|n| seed.trials(n)));
            let mut lr = Table::new();
            set(&mut lr, "l2", a.l2);
            set(&mut lr, "step", a.step);
            set(&mut lr, "max_iter", a.max_iter);
            set(&mut lr, "tol", a.tol);
            if !lr.is_empty() {
                t.insert("logreg".into(), lr.into());
            }
            let sk = a.sketch.table();
            if !sk.is_empty() {
                t.insert("svd".into(), sk.into());
            }
            set(&mut t, "budget", a.dense_budget);
            if let Some(p) = &a.external {
                let mut e = Table::new();
                e.insert("path".into(), path_value(p)?);
                let stem = p.file_stem().map_or("external".into(), |s| s.to_string_lossy().into_owned());
                e.insert("name".into(), a.external_name.clone().unwrap_or(stem).into());
                e.insert("train_fraction".into(), a.train_fraction.unwrap_or(0.8).into());
                t.insert("external".into(), e.into());
            }
            Cmd::Transfer
        }
        Command::Sts(a) => {
            if let Some(p) = &a.input {
                t.insert("input".into(), path_value(p)?);
            }
            if let Some(p) = &a.pairs {
                t.insert("pairs".into(), path_value(p)?);
            }
            set(&mut t, "product_norm", a.product_norm.then_some(true));
            set(&mut t, "output", a.output.clone());
            Cmd::Sts
        }
        Command::Rerun(_) => unreachable!("rerun has no config"),
    };
    Ok((cmd, t))
}

/// Applies `--train-fraction` to every dataset after the layers are merged.
fn apply_train_fraction(table: &mut Table, fraction: Option<f64>) {
    let (Some(f), Some(Value::Array(ds))) = (fraction, table.get_mut("datasets")) else {
        return;
    };
    for d in ds.iter_mut() {
        if let Value::Table(d) = d {
            d.insert("train_fraction".into(), f.into());
        }
    }
}

fn resolve(cli: &Cli, file: &ConfigFile, seed: RngSeed) -> Result<(Cmd, Table)> {
    let (cmd, flags) = flag_table(&cli.command, seed)?;
    let mut table = commands::defaults(cmd, seed);
    let mut section = file.section(cmd.name())?;
    for key in ["input", "pairs"] {
        absolutize(&mut section, key)?;
    }
    if let Some(Value::Table(ext)) = section.get_mut("external") {
        absolutize(ext, "path")?;
    }
    merge(&mut table, section);
    merge(&mut table, flags);
    if let Command::Transfer(a) = &cli.command {
        apply_train_fraction(&mut table, a.train_fraction);
    }
    if let Some(key) = commands::missing_required(cmd, &table) {
        let what = if key == "input" { "an input matrix path".to_string() } else { format!("--{key}") };
        Cli::command()
            .error(ErrorKind::MissingRequiredArgument, format!("{} requires {what} (flag or [{}] config)", cmd.name(), cmd.name()))
            .exit();
    }
    Ok((cmd, table))
}

fn record(cmd: Cmd, table: Table, seed: RngSeed, out_dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let Outcome { inputs, outputs } = commands::execute(cmd, &table, seed, out_dir)?;
    let inputs = inputs.iter().map(|p| FileRecord::of(p)).collect::<Result<Vec<_>>>()?;
    let outputs = outputs
        .iter()
        .map(|p| {
            let rec = FileRecord::of(&out_dir.join(p))?;
            Ok(FileRecord { path: p.clone(), ..rec })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        command: cmd.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        threads: rayon::current_num_threads(),
        out_dir: std::path::absolute(out_dir)?,
        duration_secs: start.elapsed().as_secs_f64(),
        inputs,
        outputs,
        config: table,
    };
    log::info!("{} finished in {:.2}s", cmd.name(), manifest.duration_secs);
    let path = out_dir.join(RunManifest::file_name(cmd.name()));
    manifest.write_atomic(&path)?;
    println!("manifest: {}", path.display());
    Ok(manifest)
}

fn rerun(path: &Path, out_dir: Option<&Path>) -> Result<()> {
    let old = RunManifest::read(path)?;
    let cmd = Cmd::from_name(&old.command).with_context(|| format!("unknown command {:?} in manifest", old.command))?;
    for input in &old.inputs {
        let now = manifest::sha256_file(&input.path)?;
        if now != input.sha256 {
            bail!("input {} changed since the recorded run", input.path.display());
        }
    }
    commands::check(cmd, &old.config)?;
    let out_dir = out_dir.unwrap_or(&old.out_dir).to_path_buf();
    let new = record(cmd, old.config.clone(), old.seed, &out_dir)?;
    let mismatched: Vec<String> = old
        .outputs
        .iter()
        .filter(|o| !new.outputs.contains(o))
        .map(|o| o.path.display().to_string())
        .collect();
    if !mismatched.is_empty() || new.outputs.len() != old.outputs.len() {
        bail!("outputs differ from the recorded run: {}", mismatched.join(", "));
    }
    println!("reproduced {} outputs byte-identically", new.outputs.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting the worker pool")?;
    }
    let explicit_out = cli.out_dir.clone().or(file.out_dir.clone());
    if let Command::Rerun(a) = &cli.command {
        return rerun(&a.manifest, explicit_out.as_deref());
    }
    let seed = RngSeed(cli.seed.or(file.seed).unwrap_or(0));
    let out_dir = explicit_out.unwrap_or_else(|| PathBuf::from("."));
    let (cmd, table) = resolve(&cli, &file, seed)?;
    commands::check(cmd, &table)?;
    record(cmd, table, seed, &out_dir).map(drop)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
