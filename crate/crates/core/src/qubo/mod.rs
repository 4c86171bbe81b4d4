//! QUBO and Ising models, their energies, and the exact change of variables
//! `s = 2x - 1` between them.

mod builders;
mod io;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiles::MatrixKind;

pub use builders::{
    build_distance_qubo, build_kernel_qubo, penalty_lower_bound, var_index, Lambda, LambdaPolicy,
};
pub use io::{read_ising, read_qubo, write_ising, write_qubo};

#[derive(Debug, Error)]
pub enum QuboError {
    #[error("length mismatch: model has {expected} variables, vector has {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("penalty coefficients must be positive and finite, got {0}")]
    NonPositiveLambda(f64),
    #[error("expected {expected} per-profile penalties, got {found}")]
    LambdaCount { expected: usize, found: usize },
    #[error("expected a {expected} matrix, got {found}")]
    KindMismatch {
        expected: MatrixKind,
        found: MatrixKind,
    },
    #[error("need more profiles than groups (got {profiles} profiles, {groups} groups)")]
    GroupCountExceedsProfiles { profiles: usize, groups: usize },
    #[error("number of groups must be at least 1")]
    ZeroGroups,
    #[error("entry ({0}, {1}) lies below the diagonal")]
    LowerTriangle(usize, usize),
    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid bit string character {0:?}")]
    InvalidBit(char),
    #[error("spin values must be -1 or +1, got {0}")]
    InvalidSpin(i64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Assignment of the binary variables of a [`QuboModel`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Bits of `code`, with index 0 holding the most significant of the low
    /// `n` bits.
    pub fn from_code(code: u64, n: usize) -> Self {
        Self((0..n).map(|i| (code >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn to_spins(&self) -> SpinVector {
        SpinVector(self.0.iter().map(|&b| if b { 1 } else { -1 }).collect())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = QuboError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QuboError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitVector)
    }
}

impl Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Assignment of the spins of an [`IsingModel`], each `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self, QuboError> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(QuboError::InvalidSpin(bad as i64));
        }
        Ok(Self(spins))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn to_bits(&self) -> BitVector {
        BitVector(self.0.iter().map(|&s| s > 0).collect())
    }
}

/// `f(x) = x^T Q x + offset` with `Q` upper triangular.
///
/// Linear coefficients live on the diagonal since `x_i^2 = x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    n: usize,
    q: Vec<f64>,
    offset: f64,
}

impl QuboModel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            q: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    /// Build from a dense row-major `n x n` matrix that must be upper
    /// triangular.
    pub fn from_upper(n: usize, q: Vec<f64>, offset: f64) -> Result<Self, QuboError> {
        if q.len() != n * n {
            return Err(QuboError::LengthMismatch {
                expected: n * n,
                found: q.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if q[i * n + j] != 0.0 {
                    return Err(QuboError::LowerTriangle(i, j));
                }
            }
        }
        Ok(Self { n, q, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    /// Coefficient of `x_i x_j`; zero below the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    /// Add `v` to the coefficient of `x_i x_j`, folding `(j, i)` onto the
    /// upper triangle.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.q[a * self.n + b] += v;
    }

    /// Stored nonzero entries `(i, j, q_ij)` with `i <= j`, row by row.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i..self.n).filter_map(move |j| {
                let v = self.get(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.q.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn energy(&self, x: &BitVector) -> Result<f64, QuboError> {
        qubo_energy(self, x)
    }

    /// Energy without a length check. `x.len()` must equal `n`.
    pub(crate) fn energy_unchecked(&self, x: &[bool]) -> f64 {
        let mut e = self.offset;
        for i in (0..self.n).filter(|&i| x[i]) {
            let row = &self.q[i * self.n..(i + 1) * self.n];
            for (j, &v) in row.iter().enumerate().skip(i) {
                if x[j] && v != 0.0 {
                    e += v;
                }
            }
        }
        e
    }
}

/// `x^T Q x + offset` by direct summation over stored nonzeros.
pub fn qubo_energy(m: &QuboModel, x: &BitVector) -> Result<f64, QuboError> {
    if x.len() != m.n {
        return Err(QuboError::LengthMismatch {
            expected: m.n,
            found: x.len(),
        });
    }
    Ok(m.energy_unchecked(x.bits()))
}

/// `sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    j: Vec<f64>,
    h: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            j: vec![0.0; n * n],
            h: vec![0.0; n],
            offset: 0.0,
        }
    }

    /// Build from a dense row-major coupling matrix that must be strictly
    /// upper triangular.
    pub fn new(n: usize, j: Vec<f64>, h: Vec<f64>, offset: f64) -> Result<Self, QuboError> {
        if j.len() != n * n {
            return Err(QuboError::LengthMismatch {
                expected: n * n,
                found: j.len(),
            });
        }
        if h.len() != n {
            return Err(QuboError::LengthMismatch {
                expected: n,
                found: h.len(),
            });
        }
        for a in 0..n {
            for b in 0..=a {
                if j[a * n + b] != 0.0 {
                    return Err(QuboError::LowerTriangle(a, b));
                }
            }
        }
        Ok(Self { n, j, h, offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.j[a * self.n + b]
    }

    pub fn field(&self) -> &[f64] {
        &self.h
    }

    /// Add `v` to the coupling between distinct spins `a` and `b`.
    pub fn add_coupling(&mut self, a: usize, b: usize, v: f64) {
        assert_ne!(a, b, "self-coupling is a constant, not a coupling");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.j[a * self.n + b] += v;
    }

    pub fn add_field(&mut self, a: usize, v: f64) {
        self.h[a] += v;
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    /// Nonzero couplings `(a, b, J_ab)` with `a < b`.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |a| {
            (a + 1..self.n).filter_map(move |b| {
                let v = self.coupling(a, b);
                (v != 0.0).then_some((a, b, v))
            })
        })
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> f64 {
        let mut e = self.offset;
        for a in 0..self.n {
            let sa = s[a] as f64;
            e += self.h[a] * sa;
            let row = &self.j[a * self.n..(a + 1) * self.n];
            let mut acc = 0.0;
            for (b, &v) in row.iter().enumerate().skip(a + 1) {
                if v != 0.0 {
                    acc += v * s[b] as f64;
                }
            }
            e += sa * acc;
        }
        e
    }
}

pub fn ising_energy(m: &IsingModel, s: &SpinVector) -> Result<f64, QuboError> {
    if s.len() != m.n {
        return Err(QuboError::LengthMismatch {
            expected: m.n,
            found: s.len(),
        });
    }
    Ok(m.energy_unchecked(s.spins()))
}

/// Substitute `x = (s + 1) / 2`. Energies agree exactly on every assignment.
pub fn ising_from_qubo(m: &QuboModel) -> IsingModel {
    let mut out = IsingModel::zeros(m.n);
    out.offset = m.offset;
    for (i, j, q) in m.nonzeros() {
        if i == j {
            // q x = q (s + 1) / 2
            out.h[i] += q / 2.0;
            out.offset += q / 2.0;
        } else {
            // q x_i x_j = q (s_i s_j + s_i + s_j + 1) / 4
            out.j[i * m.n + j] += q / 4.0;
            out.h[i] += q / 4.0;
            out.h[j] += q / 4.0;
            out.offset += q / 4.0;
        }
    }
    out
}

/// Substitute `s = 2x - 1`, keeping the constant so energies agree exactly.
pub fn qubo_from_ising(m: &IsingModel) -> QuboModel {
    let mut out = QuboModel::zeros(m.n);
    out.offset = m.offset;
    for (a, b, jab) in m.couplings() {
        // J s_a s_b = J (4 x_a x_b - 2 x_a - 2 x_b + 1)
        out.q[a * m.n + b] += 4.0 * jab;
        out.q[a * m.n + a] -= 2.0 * jab;
        out.q[b * m.n + b] -= 2.0 * jab;
        out.offset += jab;
    }
    for (a, &h) in m.h.iter().enumerate() {
        // h s = 2 h x - h
        out.q[a * m.n + a] += 2.0 * h;
        out.offset -= h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_bits(n: usize) -> impl Iterator<Item = BitVector> {
        (0..1u64 << n).map(move |c| BitVector::from_code(c, n))
    }

    #[test]
    fn zero_model_energy_is_offset() {
        let mut m = QuboModel::zeros(3);
        m.set_offset(2.5);
        for x in all_bits(3) {
            assert_eq!(qubo_energy(&m, &x).unwrap(), 2.5);
        }
    }

    #[test]
    fn two_variable_energy() {
        let m = QuboModel::from_upper(2, vec![1.0, -2.0, 0.0, 1.0], 0.0).unwrap();
        assert_eq!(qubo_energy(&m, &"11".parse().unwrap()).unwrap(), 0.0);
        assert_eq!(qubo_energy(&m, &"10".parse().unwrap()).unwrap(), 1.0);
        assert!(matches!(
            qubo_energy(&m, &"1".parse().unwrap()),
            Err(QuboError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rejects_lower_entries() {
        assert!(matches!(
            QuboModel::from_upper(2, vec![0.0, 0.0, 1.0, 0.0], 0.0),
            Err(QuboError::LowerTriangle(1, 0))
        ));
        assert!(IsingModel::new(2, vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 2], 0.0).is_err());
    }

    #[test]
    fn two_spin_coupling() {
        let mut m = IsingModel::zeros(2);
        m.add_coupling(0, 1, 1.0);
        let e = |s: Vec<i8>| ising_energy(&m, &SpinVector::new(s).unwrap()).unwrap();
        assert_eq!(e(vec![1, -1]), -1.0);
        assert_eq!(e(vec![1, 1]), 1.0);
        assert!(SpinVector::new(vec![0, 1]).is_err());
    }

    #[test]
    fn single_variable_to_ising() {
        let m = QuboModel::from_upper(1, vec![1.0], 0.0).unwrap();
        let is = ising_from_qubo(&m);
        assert_eq!(is.field(), &[0.5]);
        assert_eq!(is.offset(), 0.5);
        let down = SpinVector::new(vec![-1]).unwrap();
        assert_eq!(ising_energy(&is, &down).unwrap(), 0.0);

        let z = ising_from_qubo(&QuboModel::zeros(3));
        assert_eq!(z.couplings().count(), 0);
        assert!(z.field().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn ising_to_qubo_examples() {
        let is = IsingModel::new(1, vec![0.0], vec![1.0], 0.0).unwrap();
        let q = qubo_from_ising(&is);
        assert_eq!(q.get(0, 0), 2.0);
        assert_eq!(q.offset(), -1.0);

        let mut is = IsingModel::zeros(2);
        is.add_coupling(0, 1, 1.0);
        let q = qubo_from_ising(&is);
        assert_eq!((q.get(0, 1), q.get(0, 0), q.get(1, 1), q.offset()), (4.0, -2.0, -2.0, 1.0));
        // enumerate the four states directly against the spin Hamiltonian
        for x in all_bits(2) {
            let s = x.to_spins();
            let direct = s.spins()[0] as f64 * s.spins()[1] as f64;
            assert_eq!(qubo_energy(&q, &x).unwrap(), direct);
        }
    }

    #[test]
    fn bit_string_roundtrip() {
        let b: BitVector = "0110".parse().unwrap();
        assert_eq!(b.to_string(), "0110");
        assert_eq!(BitVector::from_code(0b0110, 4), b);
        assert!("012".parse::<BitVector>().is_err());
        assert_eq!(b.to_spins().to_bits(), b);
    }

    fn random_qubo(seed: u64, n: usize) -> QuboModel {
        use rand::Rng;
        let mut r = crate::seed::rng(seed);
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                q[i * n + j] = r.gen_range(-3.0..3.0);
            }
        }
        QuboModel::from_upper(n, q, r.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn energy_matches_polynomial_sweep() {
        let m = random_qubo(8, 8);
        for x in all_bits(8) {
            let b = x.bits();
            let mut want = m.offset();
            for i in 0..8 {
                if b[i] {
                    want += m.get(i, i);
                }
                for j in i + 1..8 {
                    if b[i] && b[j] {
                        want += m.get(i, j);
                    }
                }
            }
            assert!((qubo_energy(&m, &x).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_energy_matches_double_loop() {
        use rand::Rng;
        let mut r = crate::seed::rng(88);
        let mut is = IsingModel::zeros(8);
        for a in 0..8 {
            is.add_field(a, r.gen_range(-2.0..2.0));
            for b in a + 1..8 {
                is.add_coupling(a, b, r.gen_range(-2.0..2.0));
            }
        }
        for x in all_bits(8) {
            let s = x.to_spins();
            let sv: Vec<f64> = s.spins().iter().map(|&v| v as f64).collect();
            let mut want = is.offset();
            for a in 0..8 {
                want += is.field()[a] * sv[a];
                for b in a + 1..8 {
                    want += is.coupling(a, b) * sv[a] * sv[b];
                }
            }
            assert!((ising_energy(&is, &s).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ten_variable_roundtrips() {
        for seed in 0..5 {
            let m = random_qubo(100 + seed, 10);
            let is = ising_from_qubo(&m);
            let back = qubo_from_ising(&is);
            for x in all_bits(10) {
                let e = qubo_energy(&m, &x).unwrap();
                assert!((ising_energy(&is, &x.to_spins()).unwrap() - e).abs() < 1e-9);
                assert!((qubo_energy(&back, &x).unwrap() - e).abs() < 1e-9);
            }
        }
    }
}
