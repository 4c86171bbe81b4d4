//! Sparse view of a QUBO with incremental single-flip energy updates.

use crate::qubo::QuboModel;

/// Symmetric adjacency of the off-diagonal couplings plus the diagonal.
pub(crate) struct SparseQubo {
    pub diag: Vec<f64>,
    /// `neighbors[i]` lists `(j, q)` for every stored `q_ij` or `q_ji`, `j != i`.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    pub offset: f64,
}

impl SparseQubo {
    pub fn new(m: &QuboModel) -> Self {
        let n = m.n();
        let mut diag = vec![0.0; n];
        let mut neighbors = vec![Vec::new(); n];
        for (i, j, v) in m.nonzeros() {
            if i == j {
                diag[i] = v;
            } else {
                neighbors[i].push((j, v));
                neighbors[j].push((i, v));
            }
        }
        Self {
            diag,
            neighbors,
            offset: m.offset(),
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let mut e = self.offset;
        for i in (0..self.n()).filter(|&i| x[i]) {
            e += self.diag[i];
            for &(j, v) in &self.neighbors[i] {
                if j > i && x[j] {
                    e += v;
                }
            }
        }
        e
    }
}

/// Current assignment with cached local fields `sum_j q_ij x_j`.
pub(crate) struct FlipState<'a> {
    q: &'a SparseQubo,
    pub bits: Vec<bool>,
    field: Vec<f64>,
    pub energy: f64,
}

impl<'a> FlipState<'a> {
    pub fn new(q: &'a SparseQubo, bits: Vec<bool>) -> Self {
        let mut s = Self {
            q,
            field: vec![0.0; bits.len()],
            energy: 0.0,
            bits,
        };
        s.resync();
        s
    }

    /// Recompute fields and energy from scratch.
    pub fn resync(&mut self) {
        for (i, f) in self.field.iter_mut().enumerate() {
            *f = self.q.neighbors[i]
                .iter()
                .filter(|(j, _)| self.bits[*j])
                .map(|(_, v)| v)
                .sum();
        }
        self.energy = self.q.energy(&self.bits);
    }

    /// Energy change if bit `i` were flipped.
    #[inline]
    pub fn delta(&self, i: usize) -> f64 {
        let gain = self.q.diag[i] + self.field[i];
        if self.bits[i] {
            -gain
        } else {
            gain
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        let d = self.delta(i);
        self.bits[i] = !self.bits[i];
        let sign = if self.bits[i] { 1.0 } else { -1.0 };
        for &(j, v) in &self.q.neighbors[i] {
            self.field[j] += sign * v;
        }
        self.energy += d;
    }
}
