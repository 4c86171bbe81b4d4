//! Exhaustive minimization, used as the exact oracle.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{SolveError, SolveResult, SolverMeta};
use crate::qubo::{BitVector, QuboModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BruteForceParams {
    /// Largest model size accepted.
    pub max_vars: usize,
}

impl Default for BruteForceParams {
    fn default() -> Self {
        Self { max_vars: 24 }
    }
}

/// Absolute cap regardless of configuration; codes are held in a `u64`.
const HARD_CAP: usize = 40;

/// Enumerate all `2^n` assignments in Gray-code order.
///
/// Among minimizers the bit vector that is smallest when read with index 0
/// as the most significant bit wins.
pub fn brute_force_solve(
    m: &QuboModel,
    params: &BruteForceParams,
) -> Result<SolveResult, SolveError> {
    let n = m.n();
    let cap = params.max_vars.min(HARD_CAP);
    if n > cap {
        return Err(SolveError::TooManyVariables { n, cap });
    }
    let start = Instant::now();

    // Symmetric coupling rows, indexed by integer bit position p = n - 1 - i
    // so that Gray-code bit p is vector index n - 1 - p.
    let pos = |i: usize| n - 1 - i;
    let mut diag = vec![0.0; n];
    let mut sym = vec![0.0; n * n];
    let mut scale = m.offset().abs();
    for (i, j, v) in m.nonzeros() {
        scale += v.abs();
        if i == j {
            diag[pos(i)] = v;
        } else {
            sym[pos(i) * n + pos(j)] = v;
            sym[pos(j) * n + pos(i)] = v;
        }
    }
    let tol = 1e-12 * (1.0 + scale);

    let exact = |code: u64| -> f64 {
        let mut e = m.offset();
        for p in (0..n).filter(|&p| code >> p & 1 == 1) {
            e += diag[p];
            for r in (p + 1..n).filter(|&r| code >> r & 1 == 1) {
                e += sym[p * n + r];
            }
        }
        e
    };

    let mut code: u64 = 0;
    let mut field = vec![0.0; n];
    let mut energy = m.offset();
    let mut best = (energy, code);
    let total: u64 = 1 << n;

    for k in 1..total {
        let p = k.trailing_zeros() as usize;
        let on = code >> p & 1 == 0;
        let gain = diag[p] + field[p];
        energy += if on { gain } else { -gain };
        code ^= 1 << p;
        let sign = if on { 1.0 } else { -1.0 };
        let row = &sym[p * n..(p + 1) * n];
        for (f, &w) in field.iter_mut().zip(row) {
            *f += sign * w;
        }
        if k & 0xffff == 0 {
            energy = exact(code);
            for (r, f) in field.iter_mut().enumerate() {
                *f = (0..n)
                    .filter(|&s| code >> s & 1 == 1)
                    .map(|s| sym[r * n + s])
                    .sum();
            }
        }
        if energy < best.0 - tol {
            best = (energy, code);
        } else if energy <= best.0 + tol && code < best.1 {
            best = (energy.min(best.0), code);
        }
    }

    let wall_time = start.elapsed().as_secs_f64();
    let bits = BitVector::from_code(best.1, n);
    let best_energy = m.energy_unchecked(bits.bits());
    Ok(SolveResult {
        best_bits: bits,
        best_energy,
        wall_time,
        trajectory: None,
        meta: SolverMeta {
            solver: "brute-force".into(),
            seed: 0,
            iterations: total,
            restarts: 1,
            best_restart: 0,
        },
    })
}
