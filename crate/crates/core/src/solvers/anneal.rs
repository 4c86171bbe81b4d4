//! Single-flip Metropolis simulated annealing.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::{FlipState, SparseQubo};
use super::{best_of, SolveError, SolveResult, SolverConfig, SolverKind, SolverMeta};
use crate::qubo::{BitVector, QuboModel};
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealParams {
    pub sweeps: usize,
    pub restarts: usize,
    /// Starting temperature; `None` uses the largest |Q| entry.
    pub t_start: Option<f64>,
    /// Final temperature as a fraction of the starting one.
    pub t_end_ratio: f64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            sweeps: 1000,
            restarts: 10,
            t_start: None,
            t_end_ratio: 1e-3,
        }
    }
}

struct Schedule {
    t0: f64,
    ratio: f64,
}

impl Schedule {
    fn new(m: &QuboModel, p: &AnnealParams) -> Result<Self, SolveError> {
        if p.sweeps == 0 || p.restarts == 0 {
            return Err(SolveError::InvalidSchedule(
                "sweeps and restarts must be positive".into(),
            ));
        }
        let t0 = match p.t_start {
            Some(t) => t,
            None => {
                let q = m.max_abs_coefficient();
                if q > 0.0 {
                    q
                } else {
                    1.0
                }
            }
        };
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(SolveError::InvalidSchedule(format!(
                "start temperature must be positive, got {t0}"
            )));
        }
        if !(p.t_end_ratio > 0.0 && p.t_end_ratio <= 1.0) {
            return Err(SolveError::InvalidSchedule(format!(
                "end temperature ratio must lie in (0, 1], got {}",
                p.t_end_ratio
            )));
        }
        let ratio = if p.sweeps > 1 {
            p.t_end_ratio.powf(1.0 / (p.sweeps - 1) as f64)
        } else {
            1.0
        };
        Ok(Self { t0, ratio })
    }
}

struct Run {
    bits: Vec<bool>,
    trajectory: Vec<f64>,
}

fn run_once(q: &SparseQubo, sched: &Schedule, sweeps: usize, seed: u64) -> (f64, Run) {
    let n = q.n();
    let mut rng = rng(seed);
    let init = (0..n).map(|_| rng.gen::<bool>()).collect();
    let mut state = FlipState::new(q, init);
    let mut best_energy = state.energy;
    let mut best_bits = state.bits.clone();
    let mut trajectory = Vec::with_capacity(sweeps);
    let mut t = sched.t0;
    for _ in 0..sweeps {
        let beta = 1.0 / t;
        for i in 0..n {
            let d = state.delta(i);
            if d <= 0.0 || rng.gen::<f64>() < (-d * beta).exp() {
                state.flip(i);
                if state.energy < best_energy {
                    best_energy = state.energy;
                    best_bits.copy_from_slice(&state.bits);
                }
            }
        }
        trajectory.push(best_energy);
        t *= sched.ratio;
    }
    // Incremental updates drift; report the exact energy.
    let exact = q.energy(&best_bits);
    (
        exact,
        Run {
            bits: best_bits,
            trajectory,
        },
    )
}

/// Geometric schedule `T_k = T0 * r^k` over `sweeps` sweeps, best of
/// `restarts` independent runs.
pub fn anneal_solve(m: &QuboModel, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    cfg.expect(SolverKind::Anneal)?;
    let p = &cfg.anneal;
    let sched = Schedule::new(m, p)?;
    let q = SparseQubo::new(m);

    let start = Instant::now();
    let runs: Vec<(f64, Run)> = (0..p.restarts)
        .into_par_iter()
        .map(|r| run_once(&q, &sched, p.sweeps, derive_seed(cfg.seed, "anneal", r as u64)))
        .collect();
    let wall_time = start.elapsed().as_secs_f64();

    let (best_restart, best_energy, run) = best_of(runs).expect("restarts > 0");
    Ok(SolveResult {
        best_bits: BitVector::from_bits(run.bits),
        best_energy,
        wall_time,
        trajectory: Some(run.trajectory),
        meta: SolverMeta {
            solver: SolverKind::Anneal.name().into(),
            seed: cfg.seed,
            iterations: p.sweeps as u64,
            restarts: p.restarts,
            best_restart,
        },
    })
}
