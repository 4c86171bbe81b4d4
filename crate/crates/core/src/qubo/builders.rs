//! Kronecker-structured clustering QUBOs.
//!
//! Variables are laid out profile-major: profile `i`, group `g` is variable
//! `i * G + g`. Both builders add the one-hot penalty
//! `lambda_i * (sum_g x_i^g - 1)^2` in the form `Lambda (x) (2O - I)` and keep
//! its constant `sum_i lambda_i` in the offset, so on one-hot assignments the
//! energy equals the clustering objective exactly.

use serde::{Deserialize, Serialize};

use super::{QuboError, QuboModel};
use crate::profiles::{MatrixKind, SimilarityMatrix};

/// Index of the binary variable for profile `profile` in group `group`.
#[inline]
pub fn var_index(profile: usize, group: usize, n_groups: usize) -> usize {
    profile * n_groups + group
}

/// One-hot penalty weight, shared or per profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda {
    Scalar(f64),
    PerProfile(Vec<f64>),
}

impl Lambda {
    fn expand(&self, n_profiles: usize) -> Result<Vec<f64>, QuboError> {
        let values = match self {
            Lambda::Scalar(v) => vec![*v; n_profiles],
            Lambda::PerProfile(v) => {
                if v.len() != n_profiles {
                    return Err(QuboError::LambdaCount {
                        expected: n_profiles,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        if let Some(&bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(QuboError::NonPositiveLambda(bad));
        }
        Ok(values)
    }
}

impl From<f64> for Lambda {
    fn from(v: f64) -> Self {
        Lambda::Scalar(v)
    }
}

/// How the scalar penalty weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "value")]
pub enum LambdaPolicy {
    /// Ten times the largest entry of the matrix handed to the builder.
    TenfoldMax,
    /// `(N - G) * d_max`; distance matrices only.
    DistanceBound,
    /// Largest per-profile balance of kernel gain against penalty:
    /// `max_i max(g_ii, -g_ii - (2/G) sum_{j != i} g_ij)`. Large enough that
    /// leaving or duplicating a profile does not pay when it sits in a group
    /// at least as favourable as the average, small enough to keep the
    /// landscape navigable for single-flip solvers. Heuristic; not a bound.
    RowBalance,
    Explicit(f64),
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::TenfoldMax
    }
}

impl LambdaPolicy {
    pub fn resolve(&self, m: &SimilarityMatrix, n_groups: usize) -> Result<f64, QuboError> {
        let value = match *self {
            LambdaPolicy::TenfoldMax => 10.0 * m.max(),
            LambdaPolicy::DistanceBound => penalty_lower_bound(m, m.n(), n_groups)?,
            LambdaPolicy::RowBalance => row_balance(m, n_groups)?,
            LambdaPolicy::Explicit(v) => v,
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(QuboError::NonPositiveLambda(value));
        }
        Ok(value)
    }
}

fn row_balance(m: &SimilarityMatrix, n_groups: usize) -> Result<f64, QuboError> {
    if n_groups == 0 {
        return Err(QuboError::ZeroGroups);
    }
    let g = n_groups as f64;
    Ok((0..m.n())
        .map(|i| {
            let own = m.get(i, i);
            let rest: f64 = m.row(i).iter().sum::<f64>() - own;
            own.max(-own - 2.0 * rest / g)
        })
        .fold(0.0, f64::max))
}

fn expect_kind(m: &SimilarityMatrix, expected: MatrixKind) -> Result<(), QuboError> {
    if m.kind() == expected {
        Ok(())
    } else {
        Err(QuboError::KindMismatch {
            expected,
            found: m.kind(),
        })
    }
}

/// Smallest penalty weight for which every minimizer of the distance QUBO
/// is one-hot: `(N - G) * max d_ij`.
pub fn penalty_lower_bound(
    d: &SimilarityMatrix,
    n_profiles: usize,
    n_groups: usize,
) -> Result<f64, QuboError> {
    expect_kind(d, MatrixKind::Distance)?;
    if n_groups == 0 {
        return Err(QuboError::ZeroGroups);
    }
    if n_profiles <= n_groups {
        return Err(QuboError::GroupCountExceedsProfiles {
            profiles: n_profiles,
            groups: n_groups,
        });
    }
    Ok((n_profiles - n_groups) as f64 * d.max().max(0.0))
}

fn add_penalty(q: &mut QuboModel, lambdas: &[f64], n_groups: usize) {
    for (i, &lam) in lambdas.iter().enumerate() {
        for g in 0..n_groups {
            let a = var_index(i, g, n_groups);
            q.add(a, a, -lam);
            for h in g + 1..n_groups {
                q.add(a, var_index(i, h, n_groups), 2.0 * lam);
            }
        }
    }
    q.set_offset(q.offset() + lambdas.iter().sum::<f64>());
}

/// `Q = (D_u (x) I_G) + (Lambda (x) (2 O_G - I_G))`.
pub fn build_distance_qubo(
    d: &SimilarityMatrix,
    n_groups: usize,
    lambda: impl Into<Lambda>,
) -> Result<QuboModel, QuboError> {
    expect_kind(d, MatrixKind::Distance)?;
    if n_groups == 0 {
        return Err(QuboError::ZeroGroups);
    }
    let n = d.n();
    let lambdas = lambda.into().expand(n)?;
    let mut q = QuboModel::zeros(n * n_groups);
    for i in 0..n {
        for j in i + 1..n {
            let dij = d.get(i, j);
            if dij == 0.0 {
                continue;
            }
            for g in 0..n_groups {
                q.add(var_index(i, g, n_groups), var_index(j, g, n_groups), dij);
            }
        }
    }
    add_penalty(&mut q, &lambdas, n_groups);
    Ok(q)
}

/// `Q = ((-G_diag - 2 G_u) (x) I_G) + (Lambda (x) (2 O_G - I_G))`.
pub fn build_kernel_qubo(
    g: &SimilarityMatrix,
    n_groups: usize,
    lambda: impl Into<Lambda>,
) -> Result<QuboModel, QuboError> {
    expect_kind(g, MatrixKind::CenteredSimilarity)?;
    if n_groups == 0 {
        return Err(QuboError::ZeroGroups);
    }
    let n = g.n();
    let lambdas = lambda.into().expand(n)?;
    let mut q = QuboModel::zeros(n * n_groups);
    for i in 0..n {
        for j in i..n {
            let gij = g.get(i, j);
            if gij == 0.0 {
                continue;
            }
            let coeff = if i == j { -gij } else { -2.0 * gij };
            for grp in 0..n_groups {
                q.add(
                    var_index(i, grp, n_groups),
                    var_index(j, grp, n_groups),
                    coeff,
                );
            }
        }
    }
    add_penalty(&mut q, &lambdas, n_groups);
    Ok(q)
}
