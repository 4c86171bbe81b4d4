//! Profile ingestion and the similarity matrices derived from it.
//!
//! The pipeline is `load_profiles` -> (`hourly_average`) -> `distance_matrix`
//! -> `kernel_matrix` -> `centered_similarity` -> `normalize_01`. Every step
//! is a pure function returning a new value.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("ragged table: row {row} has {found} values, expected {expected}")]
    RaggedTable {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell at row {row}, column {col}: {value:?}")]
    NonNumericCell {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("need at least 2 profiles, got {0}")]
    TooFewProfiles(usize),
    #[error("profiles must have at least one sample")]
    EmptyProfile,
    #[error("non-finite value in profile {profile} at sample {sample}")]
    NonFinite { profile: usize, sample: usize },
    #[error("{0} labels supplied for {1} profiles")]
    LabelCount(usize, usize),
    #[error("profile length {len} is not divisible by {samples_per_hour} samples per hour")]
    IndivisibleLength { len: usize, samples_per_hour: usize },
    #[error("samples_per_hour must be positive")]
    ZeroSamplesPerHour,
    #[error("sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("matrix has a degenerate range (all entries equal {0})")]
    DegenerateRange(f64),
    #[error("expected a {expected} matrix, got {found}")]
    KindMismatch {
        expected: MatrixKind,
        found: MatrixKind,
    },
    #[error("matrix is not square: {0} values")]
    NotSquare(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Orientation of the input table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// One profile per row.
    #[default]
    RowMajor,
    /// One profile per column.
    ColumnMajor,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub layout: Layout,
    /// First line is a header. For column-major input its cells become the
    /// profile labels.
    pub has_header: bool,
    /// First column holds profile labels (row-major only).
    pub label_column: bool,
}

/// N equal-length time series of power values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    profiles: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl ProfileSet {
    pub fn new(profiles: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        Self::with_labels(profiles, None)
    }

    pub fn with_labels(
        profiles: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, ProfileError> {
        if profiles.len() < 2 {
            return Err(ProfileError::TooFewProfiles(profiles.len()));
        }
        let len = profiles[0].len();
        if len == 0 {
            return Err(ProfileError::EmptyProfile);
        }
        for (row, p) in profiles.iter().enumerate() {
            if p.len() != len {
                return Err(ProfileError::RaggedTable {
                    row,
                    expected: len,
                    found: p.len(),
                });
            }
            if let Some(sample) = p.iter().position(|v| !v.is_finite()) {
                return Err(ProfileError::NonFinite {
                    profile: row,
                    sample,
                });
            }
        }
        if let Some(l) = &labels {
            if l.len() != profiles.len() {
                return Err(ProfileError::LabelCount(l.len(), profiles.len()));
            }
        }
        Ok(Self { profiles, labels })
    }

    /// Number of profiles.
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Samples per profile.
    pub fn profile_len(&self) -> usize {
        self.profiles[0].len()
    }

    pub fn profiles(&self) -> &[Vec<f64>] {
        &self.profiles
    }

    pub fn profile(&self, i: usize) -> &[f64] {
        &self.profiles[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The first `n` profiles, or an error if fewer than two would remain.
    pub fn take(&self, n: usize) -> Result<Self, ProfileError> {
        let n = n.min(self.len());
        Self::with_labels(
            self.profiles[..n].to_vec(),
            self.labels.as_ref().map(|l| l[..n].to_vec()),
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ProfileError> {
        let mut out = csv::WriterBuilder::new().from_writer(w);
        for p in &self.profiles {
            out.write_record(p.iter().map(|v| format!("{v:.6}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Parse a comma-separated table into a [`ProfileSet`].
///
/// Missing or non-numeric cells are rejected rather than imputed.
pub fn load_profiles<R: Read>(source: R, opts: CsvOptions) -> Result<ProfileSet, ProfileError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut header: Option<Vec<String>> = None;
    let mut row_labels = Vec::new();
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;

    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if row == 0 && opts.has_header {
            header = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        let mut cells = record.iter();
        if opts.label_column && opts.layout == Layout::RowMajor {
            row_labels.push(cells.next().unwrap_or_default().to_owned());
        }
        let values = cells
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ProfileError::NonNumericCell {
                        row,
                        col,
                        value: cell.to_owned(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(ProfileError::RaggedTable {
                    row,
                    expected: w,
                    found: values.len(),
                })
            }
            _ => {}
        }
        table.push(values);
    }

    match opts.layout {
        Layout::RowMajor => {
            let labels = if opts.label_column {
                Some(row_labels)
            } else {
                None
            };
            ProfileSet::with_labels(table, labels)
        }
        Layout::ColumnMajor => {
            let cols = width.unwrap_or(0);
            let profiles = (0..cols)
                .map(|c| table.iter().map(|r| r[c]).collect())
                .collect();
            let labels = header.filter(|h| h.len() == cols);
            ProfileSet::with_labels(profiles, labels)
        }
    }
}

/// Average consecutive blocks of `samples_per_hour` samples.
pub fn hourly_average(p: &ProfileSet, samples_per_hour: usize) -> Result<ProfileSet, ProfileError> {
    if samples_per_hour == 0 {
        return Err(ProfileError::ZeroSamplesPerHour);
    }
    let len = p.profile_len();
    if len % samples_per_hour != 0 {
        return Err(ProfileError::IndivisibleLength {
            len,
            samples_per_hour,
        });
    }
    let profiles = p
        .profiles
        .iter()
        .map(|prof| {
            prof.chunks_exact(samples_per_hour)
                .map(|block| block.iter().sum::<f64>() / samples_per_hour as f64)
                .collect()
        })
        .collect();
    ProfileSet::with_labels(profiles, p.labels.clone())
}

/// Role of a [`SimilarityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Distance,
    Kernel,
    CenteredSimilarity,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MatrixKind::Distance => "distance",
            MatrixKind::Kernel => "kernel",
            MatrixKind::CenteredSimilarity => "centered-similarity",
        };
        f.write_str(s)
    }
}

/// Dense symmetric N x N matrix tagged with its role.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    kind: MatrixKind,
    normalized: bool,
}

impl SimilarityMatrix {
    /// Build from a closure evaluated on the upper triangle and mirrored, so
    /// the result is exactly symmetric.
    pub fn from_fn(n: usize, kind: MatrixKind, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self {
            n,
            values,
            kind,
            normalized: false,
        }
    }

    /// Build from explicit rows. Only the upper triangle is read; the lower
    /// triangle is mirrored from it.
    pub fn from_rows(rows: &[Vec<f64>], kind: MatrixKind) -> Result<Self, ProfileError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ProfileError::NotSquare(rows.iter().map(Vec::len).sum()));
        }
        Ok(Self::from_fn(n, kind, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn expect_kind(&self, expected: MatrixKind) -> Result<(), ProfileError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(ProfileError::KindMismatch {
                expected,
                found: self.kind,
            })
        }
    }

    /// Multiply every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Write the full symmetric matrix as CSV, one row per line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ProfileError> {
        let mut out = csv::WriterBuilder::new().from_writer(w);
        for i in 0..self.n {
            out.write_record(self.row(i).iter().map(|v| format!("{v:.17e}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Pairwise Euclidean distances.
pub fn distance_matrix(p: &ProfileSet) -> SimilarityMatrix {
    SimilarityMatrix::from_fn(p.len(), MatrixKind::Distance, |i, j| {
        if i == j {
            0.0
        } else {
            euclidean(p.profile(i), p.profile(j))
        }
    })
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// What enters the Gaussian exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelExponent {
    /// `exp(-d / (2 sigma^2))`, with the plain distance in the exponent.
    #[default]
    Distance,
    /// `exp(-d^2 / (2 sigma^2))`, the conventional Gaussian.
    SquaredDistance,
}

/// Gaussian kernel over a distance matrix.
pub fn kernel_matrix(
    d: &SimilarityMatrix,
    sigma: f64,
    exponent: KernelExponent,
) -> Result<SimilarityMatrix, ProfileError> {
    d.expect_kind(MatrixKind::Distance)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(ProfileError::NonPositiveSigma(sigma));
    }
    let denom = 2.0 * sigma * sigma;
    Ok(SimilarityMatrix::from_fn(d.n(), MatrixKind::Kernel, |i, j| {
        let dij = d.get(i, j);
        let arg = match exponent {
            KernelExponent::Distance => dij,
            KernelExponent::SquaredDistance => dij * dij,
        };
        (-arg / denom).exp()
    }))
}

/// How the kernel matrix is re-expressed relative to the data mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// `k_ij - rowmean_i - colmean_j - grandmean`: all three corrections
    /// subtracted.
    #[default]
    SubtractAll,
    /// Classical Gram centering, `k_ij - rowmean_i - colmean_j + grandmean`.
    Standard,
}

pub fn centered_similarity(
    k: &SimilarityMatrix,
    centering: Centering,
) -> Result<SimilarityMatrix, ProfileError> {
    k.expect_kind(MatrixKind::Kernel)?;
    let n = k.n();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| k.row(i).iter().sum::<f64>() / nf).collect();
    // k is symmetric, so column means equal row means; computed separately
    // anyway so the formula reads term by term.
    let col_mean: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|r| k.get(r, j)).sum::<f64>() / nf)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / nf;
    let sign = match centering {
        Centering::SubtractAll => -1.0,
        Centering::Standard => 1.0,
    };
    Ok(SimilarityMatrix::from_fn(
        n,
        MatrixKind::CenteredSimilarity,
        |i, j| k.get(i, j) - row_mean[i] - col_mean[j] + sign * grand,
    ))
}

/// Affine rescale to `[0, 1]`: `(x - min) / (max - min)`.
pub fn normalize_01(m: &SimilarityMatrix) -> Result<SimilarityMatrix, ProfileError> {
    let (lo, hi) = (m.min(), m.max());
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(ProfileError::DegenerateRange(lo));
    }
    Ok(SimilarityMatrix {
        n: m.n,
        values: m
            .values
            .iter()
            .map(|v| ((v - lo) / range).clamp(0.0, 1.0))
            .collect(),
        kind: m.kind,
        normalized: true,
    })
}

/// Divide by the largest absolute entry, keeping zero and sign in place.
pub fn normalize_max_abs(m: &SimilarityMatrix) -> Result<SimilarityMatrix, ProfileError> {
    let scale = m.max_abs();
    if !(scale > 0.0) {
        return Err(ProfileError::DegenerateRange(0.0));
    }
    Ok(m.scaled(1.0 / scale))
}
