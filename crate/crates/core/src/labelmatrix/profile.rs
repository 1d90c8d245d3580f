use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One density group: rows in it carry each label independently with probability
/// `density`, and the group holds a `coverage` fraction of all rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGroup {
    pub density: f64,
    pub coverage: f64,
}

/// How rows are mapped onto density groups.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    /// Group 0 takes the first rows, group 1 the next block, and so on.
    ContiguousBlocks,
    /// Group labels are permuted over rows with a seeded shuffle.
    #[default]
    SeededShuffle,
}

/// Validated list of density groups in canonical (strictly increasing density) order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct DensityProfile {
    groups: Vec<DensityGroup>,
    assignment: Assignment,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    groups: Vec<DensityGroup>,
    #[serde(default)]
    assignment: Assignment,
}

impl TryFrom<RawProfile> for DensityProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        DensityProfile::new(raw.groups, raw.assignment)
    }
}

impl From<DensityProfile> for RawProfile {
    fn from(p: DensityProfile) -> Self {
        RawProfile {
            groups: p.groups,
            assignment: p.assignment,
        }
    }
}

pub const COVERAGE_TOLERANCE: f64 = 1e-9;

impl DensityProfile {
    pub fn new(mut groups: Vec<DensityGroup>, assignment: Assignment) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidProfile("no groups".into()));
        }
        for g in &groups {
            if !(g.density > 0.0 && g.density < 1.0) {
                return Err(Error::InvalidProfile(format!(
                    "density {} outside (0, 1)",
                    g.density
                )));
            }
            if !(g.coverage > 0.0 && g.coverage <= 1.0) {
                return Err(Error::InvalidProfile(format!(
                    "coverage {} outside (0, 1]",
                    g.coverage
                )));
            }
        }
        let total: f64 = groups.iter().map(|g| g.coverage).sum();
        if (total - 1.0).abs() > COVERAGE_TOLERANCE {
            return Err(Error::InvalidProfile(format!(
                "coverages sum to {total}, expected 1"
            )));
        }
        groups.sort_by(|a, b| a.density.total_cmp(&b.density));
        if groups.windows(2).any(|w| w[0].density == w[1].density) {
            return Err(Error::InvalidProfile("repeated density".into()));
        }
        Ok(Self { groups, assignment })
    }

    /// A single group covering every row.
    pub fn uniform(density: f64) -> Result<Self> {
        Self::new(
            vec![DensityGroup {
                density,
                coverage: 1.0,
            }],
            Assignment::ContiguousBlocks,
        )
    }

    /// The built-in profiles: `table1-skew-sparse`, `table1-even` and `table1-skew-dense`.
    pub fn named(name: &str) -> Option<Self> {
        let coverages: [f64; 3] = match name {
            "table1-skew-sparse" => [0.90, 0.099, 0.001],
            "table1-even" => [1.0 / 3.0; 3],
            "table1-skew-dense" => [0.001, 0.099, 0.90],
            _ => return None,
        };
        let groups = [0.001, 0.01, 0.1]
            .into_iter()
            .zip(coverages)
            .map(|(density, coverage)| DensityGroup { density, coverage })
            .collect();
        Some(Self::new(groups, Assignment::SeededShuffle).expect("built-in profiles are valid"))
    }

    pub const NAMED: [&'static str; 3] = ["table1-skew-sparse", "table1-even", "table1-skew-dense"];

    pub fn groups(&self) -> &[DensityGroup] {
        &self.groups
    }

    pub fn assignment(&self) -> Assignment {
        self.assignment
    }

    pub fn with_assignment(mut self, assignment: Assignment) -> Self {
        self.assignment = assignment;
        self
    }

    /// Row counts per group for `n_rows` rows by the largest-remainder rule; ties in
    /// the fractional part go to the lower group index. When there are at least as many
    /// rows as groups, a group rounded down to zero takes one row from the largest group
    /// so every group can be summarised.
    pub fn group_sizes(&self, n_rows: usize) -> Vec<usize> {
        let exact: Vec<f64> = self.groups.iter().map(|g| g.coverage * n_rows as f64).collect();
        let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let assigned: usize = sizes.iter().sum();
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &g in order.iter().take(n_rows.saturating_sub(assigned)) {
            sizes[g] += 1;
        }
        if n_rows >= sizes.len() {
            while let Some(empty) = sizes.iter().position(|&n| n == 0) {
                let largest = (0..sizes.len()).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
                sizes[largest] -= 1;
                sizes[empty] += 1;
            }
        }
        sizes
    }
}
