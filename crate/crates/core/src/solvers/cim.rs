//! Mean-field simulation of a coherent Ising machine.
//!
//! Each spin is a real oscillator amplitude `a_i` obeying
//!
//! ```text
//! da_i/dt = (p(t) - 1 - a_i^2) a_i + eps * sum_j Jt_ij a_j
//! ```
//!
//! where `Jt = -(J + J^T)` so that configurations of low Ising energy are the
//! ones with low loss, and the pump `p` ramps linearly through the
//! oscillation threshold. Linear fields are carried by an auxiliary spin
//! with a fixed `+` sign and the RMS amplitude of the others, coupled to
//! spin `i` with `-h_i`. Spins are read out as `sign(a_i)` after every step
//! and the best configuration seen is returned.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::{FlipState, SparseQubo};
use super::{best_of, SolveError, SolveResult, SolverConfig, SolverKind, SolverMeta};
use crate::qubo::{ising_from_qubo, BitVector, QuboModel};
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CimParams {
    /// Euler steps per run.
    pub steps: usize,
    pub dt: f64,
    pub pump_start: f64,
    pub pump_end: f64,
    /// Coupling strength `eps`, relative to the row-normalized couplings.
    pub coupling: f64,
    /// Amplitudes are clamped to `[-a_max, a_max]`.
    pub amplitude_clamp: f64,
    /// Half-width of the uniform initial amplitude noise.
    pub init_noise: f64,
    pub restarts: usize,
}

impl Default for CimParams {
    fn default() -> Self {
        Self {
            steps: 2000,
            dt: 0.01,
            pump_start: 0.0,
            pump_end: 2.0,
            coupling: 2.0,
            amplitude_clamp: 1.5,
            init_noise: 0.01,
            restarts: 10,
        }
    }
}

impl CimParams {
    fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::InvalidSchedule(msg));
        if self.steps == 0 || self.restarts == 0 {
            return bad("steps and restarts must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.pump_end >= self.pump_start) || !self.pump_start.is_finite() || !self.pump_end.is_finite() {
            return bad(format!(
                "pump must be non-decreasing, got {} -> {}",
                self.pump_start, self.pump_end
            ));
        }
        if !(self.amplitude_clamp > 0.0) {
            return bad("amplitude clamp must be positive".into());
        }
        if !(self.init_noise >= 0.0) {
            return bad("initial noise must be non-negative".into());
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return bad(format!(
                "coupling strength must be non-negative, got {}",
                self.coupling
            ));
        }
        Ok(())
    }
}

/// Row-compressed coupling matrix `Jt`, scaled so its largest absolute row
/// sum (auxiliary column included) is 1. The injected field then stays
/// below `eps` whatever the model's size or units.
struct Couplings {
    rows: Vec<Vec<(usize, f64)>>,
    aux: Vec<f64>,
}

impl Couplings {
    fn new(m: &QuboModel) -> Self {
        let ising = ising_from_qubo(m);
        let n = ising.n();
        let mut rows = vec![Vec::new(); n];
        for (a, b, j) in ising.couplings() {
            rows[a].push((b, -j));
            rows[b].push((a, -j));
        }
        let aux: Vec<f64> = ising.field().iter().map(|h| -h).collect();
        let scale = (0..n)
            .map(|i| rows[i].iter().map(|e| e.1.abs()).sum::<f64>() + aux[i].abs())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            for row in &mut rows {
                for e in row.iter_mut() {
                    e.1 /= scale;
                }
            }
        }
        let aux = aux.iter().map(|v| if scale > 0.0 { v / scale } else { 0.0 }).collect();
        Self { rows, aux }
    }
}

struct Run {
    bits: Vec<bool>,
    trajectory: Vec<f64>,
}

fn run_once(
    q: &SparseQubo,
    c: &Couplings,
    p: &CimParams,
    eps: f64,
    seed: u64,
) -> Result<(f64, Run), SolveError> {
    let n = q.n();
    let mut rng = rng(seed);
    let mut amp: Vec<f64> = (0..n)
        .map(|_| {
            if p.init_noise > 0.0 {
                rng.gen_range(-p.init_noise..=p.init_noise)
            } else {
                0.0
            }
        })
        .collect();
    let mut next = vec![0.0; n];

    let mut state = FlipState::new(q, amp.iter().map(|&a| a >= 0.0).collect());
    let mut best_energy = state.energy;
    let mut best_bits = state.bits.clone();
    let mut trajectory = Vec::with_capacity(p.steps);

    let ramp = if p.steps > 1 {
        (p.pump_end - p.pump_start) / (p.steps - 1) as f64
    } else {
        0.0
    };
    for step in 0..p.steps {
        let pump = p.pump_start + ramp * step as f64;
        // The auxiliary spin carries the RMS amplitude with a fixed + sign.
        let aux_amp = (amp.iter().map(|a| a * a).sum::<f64>() / n as f64).sqrt();
        for i in 0..n {
            let a = amp[i];
            let inject: f64 = c.rows[i].iter().map(|&(j, w)| w * amp[j]).sum::<f64>()
                + c.aux[i] * aux_amp;
            let da = (pump - 1.0 - a * a) * a + eps * inject;
            next[i] = (a + p.dt * da).clamp(-p.amplitude_clamp, p.amplitude_clamp);
        }
        std::mem::swap(&mut amp, &mut next);
        if amp.iter().any(|a| !a.is_finite()) {
            return Err(SolveError::DivergedAmplitudes { step });
        }
        for (i, &a) in amp.iter().enumerate() {
            if (a >= 0.0) != state.bits[i] {
                state.flip(i);
            }
        }
        if state.energy < best_energy {
            best_energy = state.energy;
            best_bits.copy_from_slice(&state.bits);
        }
        trajectory.push(best_energy);
    }
    let exact = q.energy(&best_bits);
    Ok((
        exact,
        Run {
            bits: best_bits,
            trajectory,
        },
    ))
}

pub fn cim_solve(m: &QuboModel, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    cfg.expect(SolverKind::SimCim)?;
    let p = &cfg.cim;
    p.validate()?;
    let eps = p.coupling;
    let q = SparseQubo::new(m);
    let couplings = Couplings::new(m);

    let start = Instant::now();
    let runs = (0..p.restarts)
        .into_par_iter()
        .map(|r| run_once(&q, &couplings, p, eps, derive_seed(cfg.seed, "sim-cim", r as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let wall_time = start.elapsed().as_secs_f64();

    let (best_restart, best_energy, run) = best_of(runs).expect("restarts > 0");
    Ok(SolveResult {
        best_bits: BitVector::from_bits(run.bits),
        best_energy,
        wall_time,
        trajectory: Some(run.trajectory),
        meta: SolverMeta {
            solver: SolverKind::SimCim.name().into(),
            seed: cfg.seed,
            iterations: p.steps as u64,
            restarts: p.restarts,
            best_restart,
        },
    })
}
