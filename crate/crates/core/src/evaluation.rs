//! Decoding bit vectors into clusterings and scoring them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiles::SimilarityMatrix;
use crate::qubo::{var_index, BitVector, QuboModel};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("bit vector has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("assignment covers {assignment} profiles but the matrix is {matrix}x{matrix}")]
    DimensionMismatch { assignment: usize, matrix: usize },
    #[error("silhouette needs at least 2 non-empty groups, found {0}")]
    SingleCluster(usize),
    #[error("group {group} out of range for {n_groups} groups")]
    GroupOutOfRange { group: usize, n_groups: usize },
    #[error("number of groups must be at least 1")]
    ZeroGroups,
    #[error("model has {n_vars} variables, not a multiple of {n_profiles} profiles")]
    ModelShape { n_vars: usize, n_profiles: usize },
}

/// Group label per profile. Labels are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    groups: Vec<usize>,
    n_groups: usize,
}

impl Assignment {
    pub fn new(groups: Vec<usize>, n_groups: usize) -> Result<Self, EvalError> {
        if n_groups == 0 {
            return Err(EvalError::ZeroGroups);
        }
        if let Some(&group) = groups.iter().find(|&&g| g >= n_groups) {
            return Err(EvalError::GroupOutOfRange { group, n_groups });
        }
        Ok(Self { groups, n_groups })
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_groups];
        for &g in &self.groups {
            sizes[g] += 1;
        }
        sizes
    }

    pub fn non_empty_groups(&self) -> usize {
        self.group_sizes().iter().filter(|&&s| s > 0).count()
    }

    /// Relabel groups in order of first appearance, so two assignments
    /// describing the same partition compare equal.
    pub fn canonical(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.n_groups];
        let mut next = 0;
        self.groups
            .iter()
            .map(|&g| {
                if map[g] == usize::MAX {
                    map[g] = next;
                    next += 1;
                }
                map[g]
            })
            .collect()
    }

    /// True when both assignments induce the same partition of profiles.
    pub fn same_partition(&self, other: &Assignment) -> bool {
        self.len() == other.len() && self.canonical() == other.canonical()
    }

    /// One-hot bit vector in profile-major layout.
    pub fn to_bits(&self) -> BitVector {
        let mut bits = BitVector::zeros(self.len() * self.n_groups);
        for (i, &g) in self.groups.iter().enumerate() {
            bits.set(var_index(i, g, self.n_groups), true);
        }
        bits
    }
}

/// Read one group per profile from a profile-major bit vector.
///
/// A profile with zero or several set bits counts as a violation and is put
/// in its lowest set group, or group 0 when none is set.
pub fn decode_assignment(
    x: &BitVector,
    n_profiles: usize,
    n_groups: usize,
) -> Result<(Assignment, usize), EvalError> {
    if n_groups == 0 {
        return Err(EvalError::ZeroGroups);
    }
    if x.len() != n_profiles * n_groups {
        return Err(EvalError::LengthMismatch {
            expected: n_profiles * n_groups,
            found: x.len(),
        });
    }
    let mut violations = 0;
    let groups = x
        .bits()
        .chunks(n_groups)
        .map(|block| {
            let set = block.iter().filter(|&&b| b).count();
            if set != 1 {
                violations += 1;
            }
            block.iter().position(|&b| b).unwrap_or(0)
        })
        .collect();
    Ok((Assignment { groups, n_groups }, violations))
}

fn check_dims(a: &Assignment, d: &SimilarityMatrix) -> Result<(), EvalError> {
    if a.len() != d.n() {
        return Err(EvalError::DimensionMismatch {
            assignment: a.len(),
            matrix: d.n(),
        });
    }
    Ok(())
}

/// Sum of `d_ij` over unordered same-group pairs.
pub fn intra_group_distance(a: &Assignment, d: &SimilarityMatrix) -> Result<f64, EvalError> {
    check_dims(a, d)?;
    let g = a.groups();
    let mut total = 0.0;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if g[i] == g[j] {
                total += d.get(i, j);
            }
        }
    }
    Ok(total)
}

/// Mean silhouette width over all profiles.
///
/// Members of singleton groups score 0. Only non-empty groups are
/// candidates for the nearest other group.
pub fn silhouette(a: &Assignment, d: &SimilarityMatrix) -> Result<f64, EvalError> {
    check_dims(a, d)?;
    let sizes = a.group_sizes();
    let non_empty = sizes.iter().filter(|&&s| s > 0).count();
    if non_empty < 2 || a.len() < 2 {
        return Err(EvalError::SingleCluster(non_empty));
    }
    let g = a.groups();
    let mut sums = vec![0.0; a.n_groups()];
    let mut total = 0.0;
    for i in 0..g.len() {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..g.len() {
            if j != i {
                sums[g[j]] += d.get(i, j);
            }
        }
        let own = g[i];
        if sizes[own] == 1 {
            continue;
        }
        let within = sums[own] / (sizes[own] - 1) as f64;
        let nearest = (0..a.n_groups())
            .filter(|&h| h != own && sizes[h] > 0)
            .map(|h| sums[h] / sizes[h] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = within.max(nearest);
        if denom > 0.0 {
            total += (nearest - within) / denom;
        }
    }
    Ok(total / g.len() as f64)
}

/// Quality summary for one solver output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean silhouette; 0 when fewer than two groups are populated.
    pub silhouette: f64,
    /// Set when the silhouette could not be computed.
    pub silhouette_error: Option<String>,
    pub intra_group_distance: f64,
    pub feasible: bool,
    pub violations: usize,
    pub energy: f64,
    /// `(energy - oracle) / |oracle| * 100`; absent without an oracle or
    /// when the oracle energy is zero.
    pub gap_pct: Option<f64>,
    pub groups: Vec<usize>,
}

/// Relative gap in percent, or `None` when undefined.
pub fn optimality_gap(energy: f64, oracle: f64) -> Option<f64> {
    (oracle != 0.0).then(|| (energy - oracle) / oracle.abs() * 100.0)
}

pub fn evaluate(
    x: &BitVector,
    d: &SimilarityMatrix,
    model: &QuboModel,
    oracle_energy: Option<f64>,
) -> Result<EvalReport, EvalError> {
    let n_profiles = d.n();
    if n_profiles == 0 || model.n() % n_profiles != 0 {
        return Err(EvalError::ModelShape {
            n_vars: model.n(),
            n_profiles,
        });
    }
    let n_groups = model.n() / n_profiles;
    let (assignment, violations) = decode_assignment(x, n_profiles, n_groups)?;
    let energy = model.energy_unchecked(x.bits());
    let (silhouette, silhouette_error) = match silhouette(&assignment, d) {
        Ok(s) => (s, None),
        Err(e) => (0.0, Some(e.to_string())),
    };
    Ok(EvalReport {
        silhouette,
        silhouette_error,
        intra_group_distance: intra_group_distance(&assignment, d)?,
        feasible: violations == 0,
        violations,
        energy,
        gap_pct: oracle_energy.and_then(|o| optimality_gap(energy, o)),
        groups: assignment.groups,
    })
}
