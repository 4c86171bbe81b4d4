//! QUBO minimizers and classical clustering baselines.
//!
//! Every solver is deterministic for a fixed `(model, config, seed)`.
//! Independent restarts run in parallel and are merged by lowest energy,
//! ties going to the lowest restart index.

mod anneal;
mod baseline;
mod brute;
mod cim;
mod local;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubo::{BitVector, QuboError, QuboModel};

pub use anneal::{anneal_solve, AnnealParams};
pub use baseline::{baseline_cluster, kmeans, kmedoids, BaselineParams};
pub use brute::{brute_force_solve, BruteForceParams};
pub use cim::{cim_solve, CimParams};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{n} variables exceeds the brute-force cap of {cap}")]
    TooManyVariables { n: usize, cap: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("amplitudes diverged at step {step}")]
    DivergedAmplitudes { step: usize },
    #[error("solver config is for {found}, expected {expected}")]
    WrongKind { expected: SolverKind, found: SolverKind },
    #[error("bad group count {groups} for {profiles} profiles")]
    BadGroupCount { groups: usize, profiles: usize },
    #[error("{0} is a clustering baseline, not a QUBO solver")]
    NotQuboSolver(SolverKind),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    BruteForce,
    Anneal,
    SimCim,
    KMeans,
    KMedoids,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::BruteForce => "brute-force",
            SolverKind::Anneal => "anneal",
            SolverKind::SimCim => "sim-cim",
            SolverKind::KMeans => "k-means",
            SolverKind::KMedoids => "k-medoids",
        }
    }

    pub fn is_qubo_solver(self) -> bool {
        matches!(
            self,
            SolverKind::BruteForce | SolverKind::Anneal | SolverKind::SimCim
        )
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "brute-force" | "brute" => SolverKind::BruteForce,
            "anneal" => SolverKind::Anneal,
            "sim-cim" | "cim" => SolverKind::SimCim,
            "k-means" | "kmeans" => SolverKind::KMeans,
            "k-medoids" | "kmedoids" => SolverKind::KMedoids,
            other => return Err(format!("unknown solver {other:?}")),
        })
    }
}

/// Solver selection plus the parameters of every solver kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    pub kind: SolverKind,
    pub brute_force: BruteForceParams,
    pub anneal: AnnealParams,
    pub cim: CimParams,
    pub baseline: BaselineParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            kind: SolverKind::Anneal,
            brute_force: BruteForceParams::default(),
            anneal: AnnealParams::default(),
            cim: CimParams::default(),
            baseline: BaselineParams::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(kind: SolverKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            ..Self::default()
        }
    }

    fn expect(&self, expected: SolverKind) -> Result<(), SolveError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(SolveError::WrongKind {
                expected,
                found: self.kind,
            })
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub solver: String,
    pub seed: u64,
    /// Sweeps, Euler steps, or enumerated states, per restart.
    pub iterations: u64,
    pub restarts: usize,
    /// Restart that produced the returned assignment.
    pub best_restart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(rename = "bits")]
    pub best_bits: BitVector,
    #[serde(rename = "energy")]
    pub best_energy: f64,
    #[serde(rename = "wall_time_seconds")]
    pub wall_time: f64,
    /// Best-seen energy, sampled over the winning restart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<f64>>,
    #[serde(rename = "solver")]
    pub meta: SolverMeta,
}

/// Run whichever QUBO solver `cfg.kind` names.
pub fn solve(m: &QuboModel, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    match cfg.kind {
        SolverKind::BruteForce => brute_force_solve(m, &cfg.brute_force),
        SolverKind::Anneal => anneal_solve(m, cfg),
        SolverKind::SimCim => cim_solve(m, cfg),
        other => Err(SolveError::NotQuboSolver(other)),
    }
}

/// Pick the lowest energy; ties go to the earlier entry.
pub(crate) fn best_of<T>(runs: Vec<(f64, T)>) -> Option<(usize, f64, T)> {
    let mut best: Option<(usize, f64, T)> = None;
    for (idx, (e, payload)) in runs.into_iter().enumerate() {
        let better = match &best {
            None => true,
            Some((_, be, _)) => e < *be,
        };
        if better {
            best = Some((idx, e, payload));
        }
    }
    best
}
