//! Config layering: built-in defaults, then the matching section of the config file,
//! then command-line flags. Layers are merged as TOML tables, nested tables key by key.

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};

/// Top level of a config file: optional global settings plus one table per command.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub sections: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut table: toml::Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
        let mut take = |key: &str| table.remove(key);
        let seed = take("seed")
            .map(|v| v.try_into::<u64>())
            .transpose()
            .context("config seed must be a non-negative integer")?;
        let threads = take("threads")
            .map(|v| v.try_into::<usize>())
            .transpose()
            .context("config threads must be a positive integer")?;
        let out_dir = take("out_dir")
            .map(|v| v.try_into::<PathBuf>())
            .transpose()
            .context("config out_dir must be a path")?;
        Ok(Self {
            seed,
            threads,
            out_dir,
            sections: table,
        })
    }

    pub fn section(&self, name: &str) -> Result<toml::Table> {
        match self.sections.get(name) {
            None => Ok(toml::Table::new()),
            Some(toml::Value::Table(t)) => Ok(t.clone()),
            Some(_) => anyhow::bail!("config section [{name}] must be a table"),
        }
    }
}

/// Overlays `top` onto `base`. Tables merge recursively; anything else replaces.
pub fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Makes a path value absolute against the current directory, so manifests can be
/// replayed from anywhere.
pub fn absolutize(table: &mut toml::Table, key: &str) -> Result<()> {
    if let Some(toml::Value::String(s)) = table.get(key) {
        let abs = std::path::absolute(s).with_context(|| format!("resolving path {s}"))?;
        table.insert(key.into(), abs.to_string_lossy().into_owned().into());
    }
    Ok(())
}
