use crate::analysis::{group_stats, mean_std, row_l1_loss, GroupStats};
use crate::dense::DenseBudget;
use crate::error::{Error, Result};
use crate::factorization::{reconstruct, svd_full, SpectrumReport};
use crate::labelmatrix::{generate, DensityProfile};
use crate::seed::RngSeed;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Header of the per-seed loss table.
pub const TABLE1_HEADER: &str = "density,coverage,mean_loss,std_loss,n_rows,seed";
/// Header of the seed-aggregated loss table.
pub const TABLE1_SUMMARY_HEADER: &str =
    "profile,density,coverage,mean_loss,std_loss,seed_std,n_rows,n_seeds";

/// A density profile under a display name. In config files either a built-in name
/// (`"table1-even"`) or a table `{ name, groups, assignment }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNamedProfile", into = "RawNamedProfile")]
pub struct NamedProfile {
    pub name: String,
    pub profile: DensityProfile,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawNamedProfile {
    Builtin(String),
    Custom {
        name: String,
        #[serde(flatten)]
        profile: DensityProfile,
    },
}

impl TryFrom<RawNamedProfile> for NamedProfile {
    type Error = Error;

    fn try_from(raw: RawNamedProfile) -> Result<Self> {
        match raw {
            RawNamedProfile::Builtin(name) => NamedProfile::builtin(&name),
            RawNamedProfile::Custom { name, profile } => Ok(NamedProfile { name, profile }),
        }
    }
}

impl From<NamedProfile> for RawNamedProfile {
    fn from(p: NamedProfile) -> Self {
        match DensityProfile::named(&p.name) {
            Some(builtin) if builtin == p.profile => RawNamedProfile::Builtin(p.name),
            _ => RawNamedProfile::Custom {
                name: p.name,
                profile: p.profile,
            },
        }
    }
}

impl NamedProfile {
    pub fn builtin(name: &str) -> Result<Self> {
        let profile = DensityProfile::named(name).ok_or_else(|| {
            Error::InvalidProfile(format!(
                "unknown profile {name:?}; built-ins are {}",
                DensityProfile::NAMED.join(", ")
            ))
        })?;
        Ok(NamedProfile {
            name: name.to_string(),
            profile,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityExperimentConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rank: usize,
    pub profiles: Vec<NamedProfile>,
    pub seeds: Vec<RngSeed>,
    /// Leading singular values kept in each spectrum export.
    #[serde(default = "default_spectrum_len")]
    pub spectrum_len: usize,
    #[serde(default)]
    pub budget: DenseBudget,
}

fn default_spectrum_len() -> usize {
    2000
}

impl Default for DensityExperimentConfig {
    fn default() -> Self {
        Self {
            n_rows: 4000,
            n_cols: 4300,
            rank: 40,
            profiles: DensityProfile::NAMED
                .iter()
                .map(|n| NamedProfile::builtin(n).expect("built-in"))
                .collect(),
            seeds: RngSeed(0).trials(5),
            spectrum_len: default_spectrum_len(),
            budget: DenseBudget::DEFAULT,
        }
    }
}

impl DensityExperimentConfig {
    pub fn check(&self) -> Result<()> {
        let max = self.n_rows.min(self.n_cols);
        if self.rank == 0 || self.rank > max {
            return Err(Error::RankOutOfRange {
                rank: self.rank,
                max,
            });
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("at least one seed is required".into()));
        }
        if self.profiles.is_empty() {
            return Err(Error::InvalidArgument("at least one profile is required".into()));
        }
        let mut names: Vec<&str> = self.profiles.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("profile names must be unique".into()));
        }
        self.budget.check(self.n_rows, self.n_cols)
    }
}

/// Outcome of one (profile, seed) cell of the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityRun {
    pub profile: String,
    pub seed: RngSeed,
    pub stats: Vec<GroupStats>,
    pub spectrum: SpectrumReport,
}

/// For each profile and seed: generate, take the exact rank-`r` SVD, reconstruct and
/// summarise row L1 losses per density group. Runs come back in profile-major,
/// seed-minor config order.
pub fn run_density_grid(cfg: &DensityExperimentConfig) -> Result<Vec<DensityRun>> {
    cfg.check()?;
    let mut runs = Vec::with_capacity(cfg.profiles.len() * cfg.seeds.len());
    for p in &cfg.profiles {
        for &seed in &cfg.seeds {
            log::info!("density grid: profile {} seed {seed}", p.name);
            runs.push(run_one(cfg, p, seed)?);
        }
    }
    Ok(runs)
}

fn run_one(cfg: &DensityExperimentConfig, p: &NamedProfile, seed: RngSeed) -> Result<DensityRun> {
    let g = generate(cfg.n_rows, cfg.n_cols, &p.profile, seed)?;
    let full = svd_full(&g.matrix, cfg.budget)?;
    let k = cfg.spectrum_len.min(full.rank());
    let spectrum = SpectrumReport::from_full_spectrum(full.sigma(), k)?;
    let approx = {
        let f = full.truncate(cfg.rank)?;
        drop(full);
        reconstruct(&f, cfg.budget)?
    };
    let report = row_l1_loss(&g.matrix, &approx, &g.row_groups)?;
    Ok(DensityRun {
        profile: p.name.clone(),
        seed,
        stats: group_stats(&report, &p.profile)?,
        spectrum,
    })
}

/// One row per (run, group).
pub fn write_table1_csv<W: Write>(w: W, runs: &[DensityRun]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TABLE1_HEADER.split(','))?;
    for run in runs {
        for s in &run.stats {
            out.write_record([
                s.density.to_string(),
                s.coverage.to_string(),
                s.mean_loss.to_string(),
                s.std_loss.to_string(),
                s.n_rows.to_string(),
                run.seed.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Group statistics averaged over seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub profile: String,
    pub density: f64,
    pub coverage: f64,
    /// Mean over seeds of the per-seed group mean.
    pub mean_loss: f64,
    /// Mean over seeds of the per-seed row standard deviation.
    pub std_loss: f64,
    /// Population standard deviation of the per-seed group means.
    pub seed_std: f64,
    pub n_rows: usize,
    pub n_seeds: usize,
}

/// Aggregates runs per profile in first-seen order.
pub fn summarize(runs: &[DensityRun]) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    for r in runs {
        if !order.contains(&r.profile.as_str()) {
            order.push(&r.profile);
        }
    }
    let mut rows = Vec::new();
    for name in order {
        let group: Vec<&DensityRun> = runs.iter().filter(|r| r.profile == name).collect();
        for (gi, first) in group[0].stats.iter().enumerate() {
            let means: Vec<f64> = group.iter().map(|r| r.stats[gi].mean_loss).collect();
            let stds: Vec<f64> = group.iter().map(|r| r.stats[gi].std_loss).collect();
            let (mean_loss, seed_std) = mean_std(&means);
            rows.push(SummaryRow {
                profile: name.to_string(),
                density: first.density,
                coverage: first.coverage,
                mean_loss,
                std_loss: mean_std(&stds).0,
                seed_std,
                n_rows: first.n_rows,
                n_seeds: group.len(),
            });
        }
    }
    rows
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    if rows.is_empty() {
        out.write_record(TABLE1_SUMMARY_HEADER.split(','))?;
    }
    out.flush()?;
    Ok(())
}
