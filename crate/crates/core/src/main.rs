use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pvqubo::pipeline::{
    cmd_benchmark, cmd_build, cmd_evaluate, cmd_ingest, cmd_solve, Case, Formulation,
    Normalization, RunConfig, MODEL_FILE, RESULT_FILE,
};
use pvqubo::profiles::{Centering, KernelExponent, Layout};
use pvqubo::qubo::LambdaPolicy;
use pvqubo::solvers::SolverKind;
use pvqubo::synth;

/// Cluster time-series profiles by minimizing a QUBO.
///
/// Settings come from an optional TOML file; any flag given on the command
/// line wins over the file.
#[derive(Parser)]
#[command(name = "pvqubo", version)]
struct Cli {
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, average and truncate the input; write profiles.csv.
    Ingest,
    /// Build the QUBO; write model.txt and manifest.json.
    Build,
    /// Minimize a model; exit 2 if the decoded assignment is not one-hot.
    Solve {
        /// Defaults to model.txt in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Score a stored result; write evaluation.json.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Build, solve and evaluate a list of cases; write benchmark.csv.
    Benchmark {
        /// Comma-separated `NxG` pairs, e.g. `50x2,80x5`. Empty for none.
        #[arg(long)]
        cases: Option<String>,
        /// Comma-separated solver names.
        #[arg(long, value_delimiter = ',')]
        solvers: Option<Vec<SolverKind>>,
        /// Comma-separated sigma values to sweep.
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
        #[arg(long)]
        parallel: bool,
    },
    /// Write a synthetic PV-like dataset (24 hourly values per row).
    Synth {
        #[arg(long, default_value_t = 80)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        data_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_layout)]
    layout: Option<Layout>,
    /// Input has a header line.
    #[arg(long, global = true)]
    header: bool,
    /// First input column holds labels.
    #[arg(long, global = true)]
    label_column: bool,
    #[arg(long, global = true)]
    samples_per_hour: Option<usize>,
    /// Use only the first N profiles.
    #[arg(long = "profiles", global = true)]
    n_profiles: Option<usize>,
    #[arg(long = "groups", short = 'g', global = true)]
    n_groups: Option<usize>,
    #[arg(long, global = true, value_parser = parse_formulation)]
    formulation: Option<Formulation>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true, value_parser = parse_centering)]
    centering: Option<Centering>,
    #[arg(long, global = true, value_parser = parse_exponent)]
    kernel_exponent: Option<KernelExponent>,
    #[arg(long, global = true, value_parser = parse_normalization)]
    normalization: Option<Normalization>,
    /// tenfold-max, distance-bound, row-balance, or a positive number.
    #[arg(long, global = true, value_parser = parse_lambda)]
    lambda: Option<LambdaPolicy>,
    #[arg(long, global = true)]
    solver: Option<SolverKind>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Annealing sweeps.
    #[arg(long, global = true)]
    sweeps: Option<usize>,
    /// Restarts for every solver that has them.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Euler steps of the simulated CIM.
    #[arg(long, global = true)]
    cim_steps: Option<usize>,
    /// Brute-force variable cap; also bounds when the oracle gap is computed.
    #[arg(long, global = true)]
    max_vars: Option<usize>,
}

fn kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

fn parse_layout(s: &str) -> Result<Layout, String> {
    kebab(s)
}
fn parse_formulation(s: &str) -> Result<Formulation, String> {
    kebab(s)
}
fn parse_centering(s: &str) -> Result<Centering, String> {
    kebab(s)
}
fn parse_exponent(s: &str) -> Result<KernelExponent, String> {
    kebab(s)
}
fn parse_normalization(s: &str) -> Result<Normalization, String> {
    kebab(s)
}

fn parse_lambda(s: &str) -> Result<LambdaPolicy, String> {
    match s {
        "tenfold-max" => Ok(LambdaPolicy::TenfoldMax),
        "distance-bound" => Ok(LambdaPolicy::DistanceBound),
        "row-balance" => Ok(LambdaPolicy::RowBalance),
        other => other
            .parse::<f64>()
            .map(LambdaPolicy::Explicit)
            .map_err(|_| format!("unknown lambda policy {other:?}")),
    }
}

fn parse_cases(s: &str) -> Result<Vec<Case>> {
    s.split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|c| {
            let (n, g) = c
                .split_once(['x', 'X'])
                .with_context(|| format!("case {c:?} is not NxG"))?;
            Ok(Case {
                n_profiles: n.trim().parse().with_context(|| format!("case {c:?}"))?,
                n_groups: g.trim().parse().with_context(|| format!("case {c:?}"))?,
            })
        })
        .collect()
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$src { cfg.$($dst).+ = v; })*
            };
        }
        if self.input.is_some() {
            cfg.input = self.input;
        }
        if self.n_profiles.is_some() {
            cfg.n_profiles = self.n_profiles;
        }
        if self.lambda.is_some() {
            cfg.lambda = self.lambda;
        }
        cfg.has_header |= self.header;
        cfg.label_column |= self.label_column;
        set!(
            layout => layout,
            samples_per_hour => samples_per_hour,
            n_groups => n_groups,
            formulation => formulation,
            sigma => sigma,
            centering => centering,
            kernel_exponent => kernel_exponent,
            normalization => normalization,
            solver => solver.kind,
            seed => seed,
            output => output,
            sweeps => solver.anneal.sweeps,
            cim_steps => solver.cim.steps,
            max_vars => solver.brute_force.max_vars,
        );
        if let Some(r) = self.restarts {
            cfg.solver.anneal.restarts = r;
            cfg.solver.cim.restarts = r;
            cfg.solver.baseline.restarts = r;
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);

    match cli.command {
        Command::Ingest => {
            let p = cmd_ingest(&cfg)?;
            println!("{} profiles of length {}", p.len(), p.profile_len());
        }
        Command::Build => {
            let m = cmd_build(&cfg)?;
            println!(
                "N={} G={} n={} lambda={} -> {}",
                m.n_profiles,
                m.n_groups,
                m.n_vars,
                m.lambda,
                cfg.output.display()
            );
        }
        Command::Solve { model } => {
            let model = model.unwrap_or_else(|| cfg.output.join(MODEL_FILE));
            let out = cmd_solve(&cfg, &model)?;
            println!(
                "energy={} feasible={} wall_time={:.3}s",
                out.result.best_energy,
                out.feasible(),
                out.result.wall_time
            );
            if !out.feasible() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Evaluate { model, result } => {
            let model = model.unwrap_or_else(|| cfg.output.join(MODEL_FILE));
            let result = result.unwrap_or_else(|| cfg.output.join(RESULT_FILE));
            let r = cmd_evaluate(&cfg, &model, &result)?;
            println!(
                "silhouette={:.4} feasible={} energy={}",
                r.silhouette, r.feasible, r.energy
            );
        }
        Command::Benchmark {
            cases,
            solvers,
            sigmas,
            parallel,
        } => {
            if let Some(c) = cases {
                cfg.benchmark.cases = parse_cases(&c)?;
            }
            if let Some(s) = solvers {
                cfg.benchmark.solvers = s;
            }
            if let Some(s) = sigmas {
                cfg.benchmark.sigmas = s;
            }
            cfg.benchmark.parallel |= parallel;
            let rows = cmd_benchmark(&cfg)?;
            println!("{} rows -> {}", rows.len(), cfg.output.display());
        }
        Command::Synth {
            count,
            data_seed,
            out,
        } => {
            let file = File::create(&out).with_context(|| out.display().to_string())?;
            synth::pv_profiles(count, data_seed).write_csv(file)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for infeasible solutions
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
