use super::{Assignment, Builder, DensityProfile, LabelMatrix};
use crate::error::{Error, Result};
use crate::seed::RngSeed;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

/// Resample budget for a row that comes out empty or duplicates an earlier row.
pub const MAX_ROW_RETRIES: usize = 100;

/// A generated matrix together with the density group each row was drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedMatrix {
    pub matrix: LabelMatrix,
    pub row_groups: Vec<usize>,
    pub profile: DensityProfile,
}

impl GeneratedMatrix {
    pub fn group_rows(&self, group: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_groups
            .iter()
            .enumerate()
            .filter(move |(_, &g)| g == group)
            .map(|(i, _)| i)
    }
}

/// Draws an `n_rows × n_cols` label matrix: each row belongs to one density group and
/// each of its cells is an independent Bernoulli draw at the group density.
///
/// Rows that come out empty or identical to an earlier row are redrawn whole, up to
/// [`MAX_ROW_RETRIES`] times. Columns may stay empty at low densities.
pub fn generate(
    n_rows: usize,
    n_cols: usize,
    profile: &DensityProfile,
    seed: RngSeed,
) -> Result<GeneratedMatrix> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix must be at least 1x1, got {n_rows}x{n_cols}"
        )));
    }
    for g in profile.groups() {
        if g.density * (n_cols as f64) < 1.0 {
            log::warn!(
                "density {} over {n_cols} columns expects fewer than one label per row; \
                 expect heavy resampling",
                g.density
            );
        }
    }

    let sizes = profile.group_sizes(n_rows);
    let mut row_groups: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
        .collect();
    if profile.assignment() == Assignment::SeededShuffle {
        row_groups.shuffle(&mut seed.child("assign", 0).rng());
    }

    let mut rng = seed.child("cells", 0).rng();
    let mut builder = Builder::new(n_cols)?;
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut row = Vec::new();
    for (i, &g) in row_groups.iter().enumerate() {
        let p = profile.groups()[g].density;
        let mut attempt = 0;
        loop {
            sample_row(&mut rng, n_cols, p, &mut row);
            if !row.is_empty() {
                let h = hash_row(&row);
                let bucket = seen.entry(h).or_default();
                if !bucket.iter().any(|&k| builder.row(k) == row.as_slice()) {
                    bucket.push(i);
                    break;
                }
            }
            attempt += 1;
            if attempt > MAX_ROW_RETRIES {
                return Err(Error::RetryBoundExceeded {
                    row: i,
                    retries: MAX_ROW_RETRIES,
                });
            }
        }
        builder.push_sorted(row.iter().copied());
    }
    Ok(GeneratedMatrix {
        matrix: builder.finish(),
        row_groups,
        profile: profile.clone(),
    })
}

/// Plain Bernoulli(`density`) cells with no row constraints. Empty and repeated rows are
/// kept; this is for representation blocks rather than for a label matrix proper.
pub fn sample_bernoulli_rows(
    n_rows: usize,
    n_cols: usize,
    density: f64,
    seed: RngSeed,
) -> Result<LabelMatrix> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidArgument(format!("density {density} outside [0, 1]")));
    }
    let mut rng = seed.rng();
    let mut builder = Builder::new(n_cols)?;
    let mut row = Vec::new();
    for _ in 0..n_rows {
        sample_row(&mut rng, n_cols, density, &mut row);
        builder.push_sorted(row.iter().copied());
    }
    Ok(builder.finish())
}

fn sample_row<R: Rng>(rng: &mut R, n_cols: usize, p: f64, out: &mut Vec<u32>) {
    out.clear();
    for j in 0..n_cols {
        if rng.random::<f64>() < p {
            out.push(j as u32);
        }
    }
}

fn hash_row(row: &[u32]) -> u64 {
    let mut h = DefaultHasher::new();
    row.hash(&mut h);
    h.finish()
}
