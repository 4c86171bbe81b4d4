//! File-based orchestration behind the command-line tool: ingest, build,
//! solve, evaluate and benchmark.
//!
//! A run is fully described by a [`RunConfig`]. All randomness is derived
//! from its root `seed`; each solver invocation gets
//! `derive_seed(seed, solver_name, case_index)`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{evaluate, EvalError, EvalReport};
use crate::profiles::{
    centered_similarity, distance_matrix, hourly_average, kernel_matrix, load_profiles,
    normalize_01, normalize_max_abs, Centering, CsvOptions, KernelExponent, Layout, MatrixKind,
    ProfileError, ProfileSet, SimilarityMatrix,
};
use crate::qubo::{
    build_distance_qubo, build_kernel_qubo, read_qubo, write_qubo, BitVector, LambdaPolicy,
    QuboError, QuboModel,
};
use crate::seed::derive_seed;
use crate::solvers::{baseline_cluster, solve, SolveError, SolveResult, SolverConfig, SolverKind};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    /// Centered Gaussian-kernel similarity; rewards similar profiles sharing
    /// a group.
    #[default]
    Kernel,
    /// Raw pairwise distances; penalizes dissimilar profiles sharing a group.
    Distance,
}

/// Rescaling applied to the kernel-mode similarity matrix before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide by the largest magnitude; keeps signs.
    #[default]
    MaxAbs,
    /// Affine map onto `[0, 1]`.
    MinMax,
    None,
}

/// One benchmark case: the first `n_profiles` profiles split into
/// `n_groups` groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub n_profiles: usize,
    pub n_groups: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub cases: Vec<Case>,
    pub solvers: Vec<SolverKind>,
    /// When non-empty, every case is repeated for each sigma.
    pub sigmas: Vec<f64>,
    /// Run cases concurrently; timings then compete for cores.
    pub parallel: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            cases: [(50, 2), (60, 3), (70, 4), (80, 5)]
                .into_iter()
                .map(|(n_profiles, n_groups)| Case {
                    n_profiles,
                    n_groups,
                })
                .collect(),
            solvers: vec![SolverKind::Anneal],
            sigmas: Vec::new(),
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub layout: Layout,
    pub has_header: bool,
    pub label_column: bool,
    /// Raw samples averaged into one hourly value; 1 leaves data untouched.
    pub samples_per_hour: usize,
    /// Keep only the first N profiles.
    pub n_profiles: Option<usize>,
    pub n_groups: usize,
    pub formulation: Formulation,
    pub sigma: f64,
    pub centering: Centering,
    pub kernel_exponent: KernelExponent,
    pub normalization: Normalization,
    /// `None` picks `row-balance` for kernel mode and `distance-bound` for
    /// distance mode.
    pub lambda: Option<LambdaPolicy>,
    /// Solver choice and parameters. Its `seed` is replaced by one derived
    /// from the root seed.
    pub solver: SolverConfig,
    pub seed: u64,
    pub output: PathBuf,
    pub benchmark: BenchmarkConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            layout: Layout::RowMajor,
            has_header: false,
            label_column: false,
            samples_per_hour: 1,
            n_profiles: None,
            n_groups: 2,
            formulation: Formulation::Kernel,
            sigma: 0.3,
            centering: Centering::SubtractAll,
            kernel_exponent: KernelExponent::Distance,
            normalization: Normalization::MaxAbs,
            lambda: None,
            solver: SolverConfig::default(),
            seed: 0,
            output: PathBuf::from("out"),
            benchmark: BenchmarkConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, PipelineError> {
        toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| PipelineError::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn lambda_policy(&self) -> LambdaPolicy {
        self.lambda.unwrap_or(match self.formulation {
            Formulation::Kernel => LambdaPolicy::RowBalance,
            Formulation::Distance => LambdaPolicy::DistanceBound,
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.n_groups == 0 {
            return bad("n_groups must be at least 1".into());
        }
        if self.samples_per_hour == 0 {
            return bad("samples_per_hour must be at least 1".into());
        }
        if let Some(p) = &self.input {
            if !p.exists() {
                return bad(format!("input {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    /// Solver config for one invocation, seeded from the root seed.
    pub fn solver_for(&self, kind: SolverKind, index: u64) -> SolverConfig {
        SolverConfig {
            kind,
            seed: derive_seed(self.seed, kind.name(), index),
            ..self.solver.clone()
        }
    }
}

/// Read, average and truncate the configured input.
pub fn load_input(cfg: &RunConfig) -> Result<ProfileSet, PipelineError> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| PipelineError::Config("no input file given".into()))?;
    let file = File::open(path).map_err(io_err(path))?;
    let raw = load_profiles(
        BufReader::new(file),
        CsvOptions {
            layout: cfg.layout,
            has_header: cfg.has_header,
            label_column: cfg.label_column,
        },
    )?;
    let hourly = if cfg.samples_per_hour == 1 {
        raw
    } else {
        hourly_average(&raw, cfg.samples_per_hour)?
    };
    match cfg.n_profiles {
        Some(n) => first_profiles(&hourly, n),
        None => Ok(hourly),
    }
}

fn first_profiles(p: &ProfileSet, n: usize) -> Result<ProfileSet, PipelineError> {
    if n > p.len() {
        return Err(PipelineError::Config(format!(
            "asked for {n} profiles but the input holds {}",
            p.len()
        )));
    }
    Ok(p.take(n)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub kind: MatrixKind,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub max_abs: f64,
}

impl MatrixStats {
    fn of(m: &SimilarityMatrix) -> Self {
        Self {
            kind: m.kind(),
            min: m.min(),
            max: m.max(),
            mean: m.mean(),
            max_abs: m.max_abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n_profiles: usize,
    pub n_groups: usize,
    pub n_vars: usize,
    pub formulation: Formulation,
    pub lambda: f64,
    pub lambda_policy: LambdaPolicy,
    pub sigma: f64,
    pub centering: Centering,
    pub kernel_exponent: KernelExponent,
    pub normalization: Normalization,
    /// Statistics of the matrix the QUBO was built from.
    pub matrix: MatrixStats,
    pub seed: u64,
}

/// Everything derived from one profile set for one group count.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub distance: SimilarityMatrix,
    /// The matrix handed to the QUBO builder.
    pub encoded: SimilarityMatrix,
    pub model: QuboModel,
    pub manifest: Manifest,
}

/// Matrix the QUBO is built from, before the penalty is chosen.
pub fn encoding_matrix(
    cfg: &RunConfig,
    distance: &SimilarityMatrix,
    sigma: f64,
) -> Result<SimilarityMatrix, PipelineError> {
    Ok(match cfg.formulation {
        Formulation::Distance => distance.clone(),
        Formulation::Kernel => {
            let k = kernel_matrix(distance, sigma, cfg.kernel_exponent)?;
            let g = centered_similarity(&k, cfg.centering)?;
            match cfg.normalization {
                Normalization::MaxAbs => normalize_max_abs(&g)?,
                Normalization::MinMax => normalize_01(&g)?,
                Normalization::None => g,
            }
        }
    })
}

pub fn prepare(
    cfg: &RunConfig,
    profiles: &ProfileSet,
    n_groups: usize,
    sigma: f64,
) -> Result<Prepared, PipelineError> {
    if n_groups == 0 {
        return Err(PipelineError::Config("n_groups must be at least 1".into()));
    }
    let distance = distance_matrix(profiles);
    let encoded = encoding_matrix(cfg, &distance, sigma)?;
    let policy = cfg.lambda_policy();
    let lambda = policy.resolve(&encoded, n_groups)?;
    let model = match cfg.formulation {
        Formulation::Distance => build_distance_qubo(&encoded, n_groups, lambda)?,
        Formulation::Kernel => build_kernel_qubo(&encoded, n_groups, lambda)?,
    };
    let manifest = Manifest {
        n_profiles: profiles.len(),
        n_groups,
        n_vars: model.n(),
        formulation: cfg.formulation,
        lambda,
        lambda_policy: policy,
        sigma,
        centering: cfg.centering,
        kernel_exponent: cfg.kernel_exponent,
        normalization: cfg.normalization,
        matrix: MatrixStats::of(&encoded),
        seed: cfg.seed,
    };
    Ok(Prepared {
        distance,
        encoded,
        model,
        manifest,
    })
}

fn create_output(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| PipelineError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| PipelineError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn read_model(path: &Path) -> Result<QuboModel, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_qubo(BufReader::new(file)).map_err(|e| match e {
        QuboError::Io(source) => PipelineError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => PipelineError::Parse {
            path: path.to_path_buf(),
            msg: other.to_string(),
        },
    })
}

pub const MODEL_FILE: &str = "model.txt";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULT_FILE: &str = "result.json";
pub const TIMING_FILE: &str = "timing.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const BENCHMARK_FILE: &str = "benchmark.csv";
pub const PLOT_FILE: &str = "plot_data.csv";

/// Load and preprocess the input, then write the hourly profiles as CSV.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<ProfileSet, PipelineError> {
    cfg.validate()?;
    let p = load_input(cfg)?;
    create_output(&cfg.output)?;
    let path = cfg.output.join(PROFILES_FILE);
    p.write_csv(create(&path)?)?;
    Ok(p)
}

/// Build the configured QUBO; writes the model in triplet form and its
/// manifest.
pub fn cmd_build(cfg: &RunConfig) -> Result<Manifest, PipelineError> {
    cfg.validate()?;
    let p = load_input(cfg)?;
    let prep = prepare(cfg, &p, cfg.n_groups, cfg.sigma)?;
    create_output(&cfg.output)?;
    let model_path = cfg.output.join(MODEL_FILE);
    let mut w = create(&model_path)?;
    write_qubo(&prep.model, &mut w)?;
    w.flush().map_err(io_err(&model_path))?;
    write_json(&cfg.output.join(MANIFEST_FILE), &prep.manifest)?;
    Ok(prep.manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub result: SolveResult,
    /// One-hot violations of the decoded assignment, when the profile count
    /// is known.
    pub violations: Option<usize>,
}

impl SolveOutcome {
    pub fn feasible(&self) -> bool {
        self.violations.is_none_or(|v| v == 0)
    }
}

/// Group count of a model: from the manifest beside it when present,
/// otherwise from the config.
fn groups_for(model_path: &Path, model: &QuboModel, cfg: &RunConfig) -> Option<usize> {
    let manifest = model_path
        .parent()
        .map(|d| d.join(MANIFEST_FILE))
        .filter(|p| p.exists())
        .and_then(|p| read_json::<Manifest>(&p).ok());
    let g = match manifest {
        Some(m) if m.n_vars == model.n() => m.n_groups,
        _ => cfg.n_groups,
    };
    (g > 0 && model.n() % g == 0).then_some(g)
}

/// Minimize a model file. The result JSON carries no timing so reruns are
/// byte-identical; wall time goes to a separate file.
pub fn cmd_solve(cfg: &RunConfig, model_path: &Path) -> Result<SolveOutcome, PipelineError> {
    cfg.validate()?;
    let model = read_model(model_path)?;
    let kind = cfg.solver.kind;
    if !kind.is_qubo_solver() {
        return Err(SolveError::NotQuboSolver(kind).into());
    }
    let result = solve(&model, &cfg.solver_for(kind, 0))?;
    let violations = groups_for(model_path, &model, cfg).map(|g| {
        let n_profiles = model.n() / g;
        crate::evaluation::decode_assignment(&result.best_bits, n_profiles, g)
            .map(|(_, v)| v)
            .unwrap_or(n_profiles)
    });
    create_output(&cfg.output)?;
    let mut stored = result.clone();
    stored.wall_time = 0.0;
    write_json(&cfg.output.join(RESULT_FILE), &ResultFile::from(&stored))?;
    write_json(
        &cfg.output.join(TIMING_FILE),
        &serde_json::json!({ "solver": kind.name(), "wall_time_seconds": result.wall_time }),
    )?;
    Ok(SolveOutcome { result, violations })
}

/// On-disk result: the solver output minus its wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub bits: BitVector,
    pub energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<f64>>,
    pub solver: crate::solvers::SolverMeta,
}

impl From<&SolveResult> for ResultFile {
    fn from(r: &SolveResult) -> Self {
        Self {
            bits: r.best_bits.clone(),
            energy: r.best_energy,
            trajectory: r.trajectory.clone(),
            solver: r.meta.clone(),
        }
    }
}

/// Score a stored result against the configured input. The gap is filled
/// in when the model is small enough for the brute-force oracle.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    model_path: &Path,
    result_path: &Path,
) -> Result<EvalReport, PipelineError> {
    cfg.validate()?;
    let p = load_input(cfg)?;
    let model = read_model(model_path)?;
    let result: ResultFile = read_json(result_path)?;
    let d = distance_matrix(&p);
    let oracle = oracle_energy(cfg, &model)?;
    let report = evaluate(&result.bits, &d, &model, oracle)?;
    create_output(&cfg.output)?;
    write_json(&cfg.output.join(EVALUATION_FILE), &report)?;
    Ok(report)
}

fn oracle_energy(cfg: &RunConfig, model: &QuboModel) -> Result<Option<f64>, PipelineError> {
    if model.n() > cfg.solver.brute_force.max_vars {
        return Ok(None);
    }
    let r = solve(model, &cfg.solver_for(SolverKind::BruteForce, 0))?;
    Ok(Some(r.best_energy))
}

/// One line of the benchmark report. Column order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case: String,
    pub n_profiles: usize,
    pub n_groups: usize,
    pub n_vars: usize,
    pub solver: String,
    pub seed: u64,
    pub wall_time_s: Option<f64>,
    pub energy: Option<f64>,
    pub silhouette: Option<f64>,
    /// `true`, `false`, or `error: <message>` when the case failed.
    pub feasible: String,
    pub gap_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PlotRow<'a> {
    case: &'a str,
    solver: &'a str,
    n_vars: usize,
    sigma: f64,
    silhouette: Option<f64>,
    wall_time_s: Option<f64>,
}

struct BenchCase {
    label: String,
    case: Case,
    sigma: f64,
}

fn expand_cases(cfg: &RunConfig) -> Vec<BenchCase> {
    let b = &cfg.benchmark;
    let mut out = Vec::new();
    for &case in &b.cases {
        let base = format!("n{}g{}", case.n_profiles, case.n_groups);
        if b.sigmas.is_empty() {
            out.push(BenchCase {
                label: base,
                case,
                sigma: cfg.sigma,
            });
        } else {
            for &sigma in &b.sigmas {
                out.push(BenchCase {
                    label: format!("{base}_sigma{sigma}"),
                    case,
                    sigma,
                });
            }
        }
    }
    out
}

fn run_case(cfg: &RunConfig, all: &ProfileSet, index: usize, bc: &BenchCase) -> Vec<BenchRow> {
    let solvers = &cfg.benchmark.solvers;
    let Case {
        n_profiles,
        n_groups,
    } = bc.case;
    let row = |kind: SolverKind| BenchRow {
        case: bc.label.clone(),
        n_profiles,
        n_groups,
        n_vars: n_profiles * n_groups,
        solver: kind.name().into(),
        seed: cfg.solver_for(kind, index as u64).seed,
        wall_time_s: None,
        energy: None,
        silhouette: None,
        feasible: String::new(),
        gap_pct: None,
    };
    let failed = |kind: SolverKind, e: &dyn std::fmt::Display| BenchRow {
        feasible: format!("error: {e}"),
        ..row(kind)
    };

    let prep = first_profiles(all, n_profiles).and_then(|p| Ok((prepare(cfg, &p, n_groups, bc.sigma)?, p)));
    let (prep, profiles) = match prep {
        Ok(v) => v,
        Err(e) => return solvers.iter().map(|&k| failed(k, &e)).collect(),
    };
    let oracle = match oracle_energy(cfg, &prep.model) {
        Ok(o) => o,
        Err(e) => return solvers.iter().map(|&k| failed(k, &e)).collect(),
    };

    solvers
        .iter()
        .map(|&kind| {
            let sc = cfg.solver_for(kind, index as u64);
            let solved: Result<(BitVector, f64), PipelineError> = if kind.is_qubo_solver() {
                solve(&prep.model, &sc)
                    .map(|r| (r.best_bits, r.wall_time))
                    .map_err(Into::into)
            } else {
                let start = Instant::now();
                baseline_cluster(&profiles, n_groups, &sc)
                    .map(|a| (a.to_bits(), start.elapsed().as_secs_f64()))
                    .map_err(Into::into)
            };
            let scored = solved.and_then(|(bits, t)| {
                Ok((evaluate(&bits, &prep.distance, &prep.model, oracle)?, t))
            });
            match scored {
                Ok((rep, t)) => BenchRow {
                    wall_time_s: Some(t),
                    energy: Some(rep.energy),
                    silhouette: Some(rep.silhouette),
                    feasible: rep.feasible.to_string(),
                    gap_pct: rep.gap_pct,
                    ..row(kind)
                },
                Err(e) => failed(kind, &e),
            }
        })
        .collect()
}

/// Run every (case, sigma, solver) combination on the configured input;
/// writes the report and a plot-data CSV. A failing case is recorded in its
/// rows and the run continues.
pub fn cmd_benchmark(cfg: &RunConfig) -> Result<Vec<BenchRow>, PipelineError> {
    cfg.validate()?;
    let cases = expand_cases(cfg);
    let all = if cases.is_empty() {
        None
    } else {
        Some(load_input(cfg)?)
    };
    let rows: Vec<BenchRow> = match &all {
        None => Vec::new(),
        Some(all) if cfg.benchmark.parallel => cases
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, c)| run_case(cfg, all, i, c))
            .collect(),
        Some(all) => cases
            .iter()
            .enumerate()
            .flat_map(|(i, c)| run_case(cfg, all, i, c))
            .collect(),
    };

    create_output(&cfg.output)?;
    write_benchmark_csv(&cfg.output.join(BENCHMARK_FILE), &rows)?;
    let sigma_of = |label: &str| {
        cases
            .iter()
            .find(|c| c.label == label)
            .map_or(cfg.sigma, |c| c.sigma)
    };
    let mut w = csv::Writer::from_path(cfg.output.join(PLOT_FILE))?;
    for r in &rows {
        w.serialize(PlotRow {
            case: &r.case,
            solver: &r.solver,
            n_vars: r.n_vars,
            sigma: sigma_of(&r.case),
            silhouette: r.silhouette,
            wall_time_s: r.wall_time_s,
        })?;
    }
    if rows.is_empty() {
        w.write_record(["case", "solver", "n_vars", "sigma", "silhouette", "wall_time_s"])?;
    }
    w.flush().map_err(io_err(&cfg.output.join(PLOT_FILE)))?;
    Ok(rows)
}

pub const BENCHMARK_HEADER: [&str; 11] = [
    "case",
    "n_profiles",
    "n_groups",
    "n_vars",
    "solver",
    "seed",
    "wall_time_s",
    "energy",
    "silhouette",
    "feasible",
    "gap_pct",
];

fn write_benchmark_csv(path: &Path, rows: &[BenchRow]) -> Result<(), PipelineError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(BENCHMARK_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::pv_profiles;

    fn fixture(dir: &Path, n: usize) -> RunConfig {
        let input = dir.join("pv.csv");
        pv_profiles(n, 7).write_csv(File::create(&input).unwrap()).unwrap();
        RunConfig {
            input: Some(input),
            output: dir.join("out"),
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_from_toml_with_defaults() {
        let cfg = RunConfig::from_toml_str(
            r#"
            n_groups = 3
            sigma = 0.5
            lambda = { policy = "explicit", value = 4.0 }
            [solver]
            kind = "sim-cim"
            [solver.cim]
            steps = 500
            [benchmark]
            cases = [{ n_profiles = 10, n_groups = 2 }]
            solvers = ["anneal", "k-medoids"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.n_groups, 3);
        assert_eq!(cfg.lambda_policy(), LambdaPolicy::Explicit(4.0));
        assert_eq!(cfg.solver.kind, SolverKind::SimCim);
        assert_eq!(cfg.solver.cim.steps, 500);
        assert_eq!(cfg.solver.cim.dt, 0.01);
        assert_eq!(cfg.benchmark.solvers.len(), 2);
        assert!(RunConfig::from_toml_str("sigma = \"x\"").is_err());
    }

    #[test]
    fn validation() {
        let ok = RunConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            RunConfig { sigma: 0.0, ..ok.clone() },
            RunConfig { n_groups: 0, ..ok.clone() },
            RunConfig {
                input: Some("/definitely/missing.csv".into()),
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(PipelineError::Config(_))));
        }
    }

    #[test]
    fn default_lambda_follows_formulation() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.lambda_policy(), LambdaPolicy::RowBalance);
        cfg.formulation = Formulation::Distance;
        assert_eq!(cfg.lambda_policy(), LambdaPolicy::DistanceBound);
    }

    #[test]
    fn build_solve_evaluate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path(), 6);
        cfg.n_groups = 2;
        let manifest = cmd_build(&cfg).unwrap();
        assert_eq!((manifest.n_profiles, manifest.n_vars), (6, 12));

        cfg.solver.kind = SolverKind::BruteForce;
        let model = cfg.output.join(MODEL_FILE);
        let out = cmd_solve(&cfg, &model).unwrap();
        assert_eq!(out.violations, Some(0));

        let rep = cmd_evaluate(&cfg, &model, &cfg.output.join(RESULT_FILE)).unwrap();
        assert!(rep.feasible);
        assert_eq!(rep.gap_pct.unwrap_or(0.0), 0.0);
        assert!((rep.energy - out.result.best_energy).abs() < 1e-9);
    }

    #[test]
    fn benchmark_rows_and_failures() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path(), 8);
        cfg.benchmark.cases = vec![
            Case { n_profiles: 6, n_groups: 2 },
            // more profiles than the input holds
            Case { n_profiles: 20, n_groups: 2 },
        ];
        cfg.benchmark.solvers = vec![SolverKind::Anneal, SolverKind::KMedoids];
        let rows = cmd_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].case, "n6g2");
        assert_eq!(rows[0].feasible, "true");
        // both rows of the small case carry an oracle gap
        assert!(rows[..2].iter().all(|r| r.gap_pct.is_some()));
        assert!(rows[2..].iter().all(|r| r.feasible.starts_with("error")));

        let text = fs::read_to_string(cfg.output.join(BENCHMARK_FILE)).unwrap();
        assert_eq!(text.lines().next().unwrap(), BENCHMARK_HEADER.join(","));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn empty_benchmark_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path(), 4);
        cfg.benchmark.cases.clear();
        assert!(cmd_benchmark(&cfg).unwrap().is_empty());
        let text = fs::read_to_string(cfg.output.join(BENCHMARK_FILE)).unwrap();
        assert_eq!(text, BENCHMARK_HEADER.join(",") + "\n");
    }

    #[test]
    fn sigma_sweep_labels() {
        let cfg = RunConfig {
            benchmark: BenchmarkConfig {
                sigmas: vec![0.1, 2.0],
                cases: vec![Case { n_profiles: 80, n_groups: 5 }],
                ..BenchmarkConfig::default()
            },
            ..RunConfig::default()
        };
        let labels: Vec<String> = expand_cases(&cfg).into_iter().map(|c| c.label).collect();
        assert_eq!(labels, ["n80g5_sigma0.1", "n80g5_sigma2"]);
    }
}
