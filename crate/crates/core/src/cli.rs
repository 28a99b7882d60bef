//! Command-line front end.
//!
//! Exit codes: `0` success, `1` runtime failure, `2` usage or configuration
//! error. Settings resolve as flags over `--config` file over defaults, and
//! the effective configuration is echoed into every report.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::adaptive::{run, run_problem, AdaptiveConfig, IterationRecord, RunAbort, RunResult};
use crate::error::Error;
use crate::estimators::{cmc_estimate, PofEstimate};
use crate::extsim::server::{serve_stdio, FixtureModel, HttpFixture};
use crate::extsim::{ModelClient, ModelEndpoint};
use crate::gp::HyperoptPolicy;
use crate::problems::{brute_force_pof_with, by_name, ProblemSpec, PROBLEM_NAMES};
use crate::qmc::{derive_seed, generate_nodes, SequenceConfig, SequenceKind};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "POFGP_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "pof-gp-out";

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const BENCHMARK_FILE: &str = "benchmark.csv";
pub const BASELINES_FILE: &str = "baselines.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

/// Evaluation budgets used by `benchmark` unless overridden.
pub fn default_budget(problem: &str) -> Option<usize> {
    Some(match problem {
        "sine" => 64,
        "multimodal" | "four_branch" => 128,
        "ishigami" => 192,
        "hartmann" => 512,
        _ => return None,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "pof-gp",
    version,
    about = "Probability-of-failure estimation with Gaussian-process surrogates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the adaptive estimator on a bundled problem or an external model.
    Estimate(EstimateArgs),
    /// Run the bundled toy problems over a list of seeds.
    Benchmark(BenchmarkArgs),
    /// Crude and quasi-Monte Carlo estimates at a matched evaluation count.
    Baselines(BaselinesArgs),
    /// Turn a run summary into plot-ready series.
    Plotdata(PlotdataArgs),
    /// Serve a reference model over stdio or HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HyperoptArg {
    Initial,
    Every,
    Never,
}

impl From<HyperoptArg> for HyperoptPolicy {
    fn from(h: HyperoptArg) -> Self {
        match h {
            HyperoptArg::Initial => HyperoptPolicy::InitialOnly,
            HyperoptArg::Every => HyperoptPolicy::EveryIteration,
            HyperoptArg::Never => HyperoptPolicy::Never,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of quadrature nodes N.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Initial design size n0 (default 2d + 6).
    #[arg(long)]
    pub init: Option<usize>,
    /// Batch size b.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Evaluation budget n_max.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Target interval width (0 disables).
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long, value_enum)]
    pub hyperopt: Option<HyperoptArg>,
    /// TOML file with adaptive settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutFlag {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Bundled problem name.
    #[arg(
        long,
        conflicts_with = "endpoint",
        required_unless_present = "endpoint"
    )]
    pub problem: Option<String>,
    /// TOML file describing an external model endpoint.
    #[arg(long)]
    pub endpoint: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunFlags,
    #[command(flatten)]
    pub out: OutFlag,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated problem names (default: all).
    #[arg(long, value_delimiter = ',')]
    pub problems: Vec<String>,
    /// Seeds as a comma list and/or half-open ranges, e.g. `0..20` or `1,5,9`.
    #[arg(long, default_value = "1")]
    pub seeds: String,
    #[command(flatten)]
    pub run: RunFlags,
    #[command(flatten)]
    pub out: OutFlag,
}

#[derive(Debug, Clone, Args)]
pub struct BaselinesArgs {
    #[arg(long)]
    pub problem: String,
    /// Evaluations per method.
    #[arg(long, default_value_t = 1 << 14)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutFlag,
}

#[derive(Debug, Clone, Args)]
pub struct PlotdataArgs {
    /// A summary file, or a directory containing one.
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub out: OutFlag,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// `echo` or a bundled problem name.
    #[arg(long, default_value = "ishigami")]
    pub model: String,
    /// Sleep before answering each request.
    #[arg(long, default_value_t = 0)]
    pub delay_ms: u64,
    /// Serve HTTP on this address (e.g. 127.0.0.1:8000) instead of stdio.
    #[arg(long)]
    pub http: Option<String>,
    /// HTTP handler threads.
    #[arg(long, default_value_t = 16)]
    pub threads: usize,
}

/// A failure mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Where the evaluations came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Problem {
        name: String,
        dimension: usize,
        xi: f64,
        true_p: Option<f64>,
        provenance: String,
    },
    Endpoint(ModelEndpoint),
}

/// The structured summary written next to the iteration table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: AdaptiveConfig,
    pub source: Source,
    pub truth: Option<f64>,
    /// `None` when the run aborted.
    pub stop_reason: Option<String>,
    pub error: Option<String>,
    pub estimate: Option<PofEstimate>,
    pub evaluations: usize,
    pub iterations: Vec<IterationRecord>,
}

impl RunReport {
    pub fn new(
        config: AdaptiveConfig,
        source: Source,
        outcome: &Result<RunResult, RunAbort>,
    ) -> Self {
        let truth = match &source {
            Source::Problem { true_p, .. } => *true_p,
            Source::Endpoint(_) => None,
        };
        let (stop_reason, error, estimate, iterations, evaluations) = match outcome {
            Ok(r) => (
                Some(r.stop_reason.to_string()),
                None,
                Some(r.estimate),
                r.history.clone(),
                r.model.n(),
            ),
            Err(a) => (
                None,
                Some(a.error.to_string()),
                None,
                a.history.clone(),
                a.history.last().map_or(0, |h| h.n),
            ),
        };
        RunReport {
            tool: "pof-gp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            source,
            truth,
            stop_reason,
            error,
            estimate,
            evaluations,
            iterations,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = if path.is_dir() {
            path.join(SUMMARY_FILE)
        } else {
            path.to_path_buf()
        };
        let text = fs::read_to_string(&file)
            .map_err(|e| CliError::Usage(format!("cannot read report {}: {e}", file.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{} is not a run report: {e}", file.display())))
    }
}

#[derive(Serialize)]
struct IterationRow {
    n: usize,
    p_hat: f64,
    gamma_hat: f64,
    lower: f64,
    upper: f64,
    p_check: f64,
    gamma_check: f64,
    tries: u64,
}

/// Writes the iteration table. Elapsed times are left out so that tables
/// are byte-identical across runs with the same seed.
pub fn write_iterations(path: &Path, history: &[IterationRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for h in history {
        w.serialize(IterationRow {
            n: h.n,
            p_hat: h.p_hat,
            gamma_hat: h.gamma_hat,
            lower: h.lower,
            upper: h.upper,
            p_check: h.p_check,
            gamma_check: h.gamma_check,
            tries: h.tries,
        })
        .map_err(|e| io_err(path, e))?;
    }
    if history.is_empty() {
        w.write_record([
            "n",
            "p_hat",
            "gamma_hat",
            "lower",
            "upper",
            "p_check",
            "gamma_check",
            "tries",
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Defaults, then the `--config` file, then flags.
pub fn resolve_config(flags: &RunFlags) -> Result<(AdaptiveConfig, toml::Table), CliError> {
    let (mut config, table) = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let config: AdaptiveConfig = table
                .clone()
                .try_into()
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (config, table)
        }
        None => (AdaptiveConfig::default(), toml::Table::new()),
    };
    if let Some(v) = flags.seed {
        config.seed = v;
    }
    if let Some(v) = flags.alpha {
        config.alpha = v;
    }
    if let Some(v) = flags.nodes {
        config.nodes = v;
    }
    if let Some(v) = flags.init {
        config.n0 = Some(v);
    }
    if let Some(v) = flags.batch {
        config.batch = v;
    }
    if let Some(v) = flags.budget {
        config.budget = v;
    }
    if let Some(v) = flags.width {
        config.target_width = v;
    }
    if let Some(v) = flags.hyperopt {
        config.hyperopt = v.into();
    }
    Ok((config, table))
}

fn problem_source(p: &ProblemSpec) -> Source {
    Source::Problem {
        name: p.name.clone(),
        dimension: p.dimension,
        xi: p.xi,
        true_p: p.true_p,
        provenance: p.provenance.clone(),
    }
}

fn lookup_problem(name: &str) -> Result<ProblemSpec, CliError> {
    by_name(name).map_err(|_| {
        CliError::Usage(format!(
            "unknown problem {name:?}; expected one of {}",
            PROBLEM_NAMES.join(", ")
        ))
    })
}

pub fn cmd_estimate(args: &EstimateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (config, _) = resolve_config(&args.run)?;
    let (source, outcome) = match (&args.problem, &args.endpoint) {
        (Some(name), _) => {
            let problem = lookup_problem(name)?;
            config.validate(problem.dimension)?;
            (problem_source(&problem), run_problem(&problem, &config))
        }
        (None, Some(path)) => {
            let endpoint = ModelEndpoint::load(path)?;
            config.validate(endpoint.input_dim)?;
            let mut client = ModelClient::connect(endpoint.clone())?;
            (
                Source::Endpoint(endpoint.clone()),
                run(endpoint.input_dim, &config, &mut client),
            )
        }
        (None, None) => {
            return Err(CliError::Usage(
                "either --problem or --endpoint is required".into(),
            ))
        }
    };

    let dir = &args.out.out;
    create_dir(dir)?;
    let report = RunReport::new(config, source, &outcome);
    write_iterations(&dir.join(ITERATIONS_FILE), &report.iterations)?;
    write_json(&dir.join(SUMMARY_FILE), &report)?;

    match outcome {
        Ok(r) => {
            let e = r.estimate;
            writeln!(
                stdout,
                "P_hat = {:.6}  {:.0}% credible interval [{:.6}, {:.6}]  n = {}  stop = {}",
                e.p_hat,
                100.0 * (1.0 - e.alpha),
                e.lower,
                e.upper,
                e.n,
                r.stop_reason
            )
            .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
        Err(abort) => Err(CliError::Runtime(format!(
            "{abort}; partial report in {}",
            dir.display()
        ))),
    }
}

/// Parses `0..20`, `1,2,3` or mixtures such as `0..3,10`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || CliError::Usage(format!("cannot parse seed list entry {part:?}"));
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Usage("seed list is empty".into()));
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkRow {
    pub problem: String,
    pub dimension: usize,
    pub seed: u64,
    pub truth: f64,
    pub p_hat: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub contained: Option<bool>,
    pub evaluations: usize,
    pub iterations: usize,
    pub stop_reason: String,
    pub error: String,
}

/// Runs each problem at each seed. Failures are recorded in the row's
/// `error` column and do not stop the remaining runs.
pub fn benchmark_rows(
    problems: &[ProblemSpec],
    seeds: &[u64],
    base: &AdaptiveConfig,
    budget_fixed: bool,
) -> Vec<BenchmarkRow> {
    let mut rows = Vec::new();
    for p in problems {
        for &seed in seeds {
            let mut config = AdaptiveConfig {
                seed,
                ..base.clone()
            };
            if !budget_fixed {
                config.budget = default_budget(&p.name).unwrap_or(base.budget);
            }
            let truth = p.true_p.unwrap_or(f64::NAN);
            let outcome = run_problem(p, &config);
            rows.push(match outcome {
                Ok(r) => BenchmarkRow {
                    problem: p.name.clone(),
                    dimension: p.dimension,
                    seed,
                    truth,
                    p_hat: Some(r.estimate.p_hat),
                    lower: Some(r.estimate.lower),
                    upper: Some(r.estimate.upper),
                    contained: Some(r.estimate.contains(truth)),
                    evaluations: r.model.n(),
                    iterations: r.history.len(),
                    stop_reason: r.stop_reason.to_string(),
                    error: String::new(),
                },
                Err(a) => BenchmarkRow {
                    problem: p.name.clone(),
                    dimension: p.dimension,
                    seed,
                    truth,
                    p_hat: None,
                    lower: None,
                    upper: None,
                    contained: None,
                    evaluations: a.history.last().map_or(0, |h| h.n),
                    iterations: a.history.len(),
                    stop_reason: "aborted".into(),
                    error: a.error.to_string(),
                },
            });
        }
    }
    rows
}

pub fn cmd_benchmark(args: &BenchmarkArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (config, table) = resolve_config(&args.run)?;
    let budget_fixed = args.run.budget.is_some() || table.contains_key("budget");
    let names: Vec<String> = if args.problems.is_empty() {
        PROBLEM_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.problems.clone()
    };
    let problems = names
        .iter()
        .map(|n| lookup_problem(n))
        .collect::<Result<Vec<_>, _>>()?;
    let seeds = parse_seeds(&args.seeds)?;
    for p in &problems {
        let mut c = config.clone();
        if !budget_fixed {
            c.budget = default_budget(&p.name).unwrap_or(c.budget);
        }
        c.validate(p.dimension)?;
    }

    let rows = benchmark_rows(&problems, &seeds, &config, budget_fixed);
    let dir = &args.out.out;
    create_dir(dir)?;
    let path = dir.join(BENCHMARK_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    for r in &rows {
        w.serialize(r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;

    let out = |e: std::io::Error| CliError::Runtime(e.to_string());
    writeln!(
        stdout,
        "{:<12} {:>3} {:>8} {:>10} {:>10} {:>10} {:>9} {:>6}",
        "problem", "d", "truth", "p_hat", "lower", "upper", "contained", "n"
    )
    .map_err(out)?;
    for r in &rows {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
        writeln!(
            stdout,
            "{:<12} {:>3} {:>8} {:>10} {:>10} {:>10} {:>9} {:>6}",
            r.problem,
            r.dimension,
            r.truth,
            f(r.p_hat),
            f(r.lower),
            f(r.upper),
            r.contained.map_or("error".to_string(), |c| c.to_string()),
            r.evaluations
        )
        .map_err(out)?;
    }
    let failures: Vec<_> = rows.iter().filter(|r| !r.error.is_empty()).collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} of {} runs failed; first: {} seed {}: {}",
            failures.len(),
            rows.len(),
            failures[0].problem,
            failures[0].seed,
            failures[0].error
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub method: String,
    pub evaluations: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub truth: f64,
    pub abs_error: f64,
}

/// Crude Monte Carlo on `n` IID points and randomized QMC on `n` points
/// (eight independent shifts of `n / 8` points, for a standard error).
pub fn baseline_rows(
    problem: &ProblemSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<BaselineRow>, Error> {
    let truth = problem.true_p.ok_or_else(|| {
        Error::invalid(format!(
            "problem {} has no reference probability",
            problem.name
        ))
    })?;
    let iid = generate_nodes(
        &SequenceConfig::iid(derive_seed(seed, 1), problem.dimension),
        n,
    )?;
    let hits: Vec<f64> = iid
        .rows()
        .map(|u| if problem.fails(u) { 1.0 } else { 0.0 })
        .collect();
    let (cmc, cmc_var) = cmc_estimate(&hits)?;
    let (qmc, qmc_se) = brute_force_pof_with(
        problem,
        n,
        derive_seed(seed, 2),
        SequenceKind::LowDiscrepancy,
    )?;
    Ok(vec![
        BaselineRow {
            method: "cmc".into(),
            evaluations: n,
            estimate: cmc,
            std_error: cmc_var.sqrt(),
            truth,
            abs_error: (cmc - truth).abs(),
        },
        BaselineRow {
            method: "qmc".into(),
            evaluations: n.div_ceil(8) * 8,
            estimate: qmc,
            std_error: qmc_se,
            truth,
            abs_error: (qmc - truth).abs(),
        },
    ])
}

pub fn cmd_baselines(args: &BaselinesArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let problem = lookup_problem(&args.problem)?;
    let rows = baseline_rows(&problem, args.nodes, args.seed)?;
    let dir = &args.out.out;
    create_dir(dir)?;
    let path = dir.join(BASELINES_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    for r in &rows {
        w.serialize(r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    let out = |e: std::io::Error| CliError::Runtime(e.to_string());
    writeln!(
        stdout,
        "{:<6} {:>8} {:>10} {:>10} {:>8} {:>10}",
        "method", "n", "estimate", "std_error", "truth", "abs_error"
    )
    .map_err(out)?;
    for r in &rows {
        writeln!(
            stdout,
            "{:<6} {:>8} {:>10.6} {:>10.2e} {:>8} {:>10.2e}",
            r.method, r.evaluations, r.estimate, r.std_error, r.truth, r.abs_error
        )
        .map_err(out)?;
    }
    Ok(())
}

/// Writes `n, p_hat, lower, upper, gamma_hat, p_check`, plus `abs_error`
/// when the report carries a reference probability.
pub fn write_convergence(path: &Path, report: &RunReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    let mut header = vec!["n", "p_hat", "lower", "upper", "gamma_hat", "p_check"];
    if report.truth.is_some() {
        header.push("abs_error");
    }
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for h in &report.iterations {
        let mut row = vec![
            h.n.to_string(),
            h.p_hat.to_string(),
            h.lower.to_string(),
            h.upper.to_string(),
            h.gamma_hat.to_string(),
            h.p_check.to_string(),
        ];
        if let Some(t) = report.truth {
            row.push((h.p_hat - t).abs().to_string());
        }
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn cmd_plotdata(args: &PlotdataArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report = RunReport::load(&args.report)?;
    let dir = &args.out.out;
    create_dir(dir)?;
    let path = dir.join(CONVERGENCE_FILE);
    write_convergence(&path, &report)?;
    writeln!(
        stdout,
        "wrote {} rows to {}",
        report.iterations.len(),
        path.display()
    )
    .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn cmd_serve(args: &ServeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = FixtureModel::by_name(&args.model).map_err(|_| {
        CliError::Usage(format!(
            "unknown model {:?}; expected echo or a problem name",
            args.model
        ))
    })?;
    let delay = Duration::from_millis(args.delay_ms);
    match &args.http {
        Some(bind) => {
            let server = HttpFixture::start(model, bind, delay, args.threads)?;
            writeln!(stdout, "{}", server.url()).map_err(|e| CliError::Runtime(e.to_string()))?;
            stdout
                .flush()
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            server.join();
            Ok(())
        }
        None => {
            let stdin = std::io::stdin();
            serve_stdio(&model, delay, stdin.lock(), std::io::stdout().lock())?;
            Ok(())
        }
    }
}

pub fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, stdout),
        Command::Benchmark(a) => cmd_benchmark(a, stdout),
        Command::Baselines(a) => cmd_baselines(a, stdout),
        Command::Plotdata(a) => cmd_plotdata(a, stdout),
        Command::Serve(a) => cmd_serve(a, stdout),
    }
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout();
    match dispatch(&cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), [0, 1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), [4, 9]);
        assert_eq!(parse_seeds("0..2,7").unwrap(), [0, 1, 7]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn flags_override_defaults() {
        let flags = RunFlags {
            seed: Some(9),
            init: Some(5),
            hyperopt: Some(HyperoptArg::Never),
            ..RunFlags::default()
        };
        let (c, _) = resolve_config(&flags).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.n0, Some(5));
        assert_eq!(c.hyperopt, HyperoptPolicy::Never);
        assert_eq!(c.alpha, AdaptiveConfig::default().alpha);
    }

    #[test]
    fn default_budgets() {
        let b: Vec<_> = PROBLEM_NAMES
            .iter()
            .map(|n| default_budget(n).unwrap())
            .collect();
        assert_eq!(b, [64, 128, 128, 192, 512]);
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(CliError::from(Error::invalid("x")).exit_code(), 2);
        assert_eq!(CliError::from(Error::Process("x".into())).exit_code(), 1);
    }
}
