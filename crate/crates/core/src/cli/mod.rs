//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage (bad flags, unreadable files, empty
//! evidence in an independence mode), 3 parse error, 4 resource budget
//! exhausted, 5 internal invariant violation or failed verification.
//! Reports go to stdout (or `--output`); diagnostics go to stderr only.

mod generate;
mod verify;

pub use generate::{generate_network, random_evidence, random_instance, GenerateOptions};
pub use verify::{verify, CheckTally, Disagreement, VerifyReport};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::hypercube::{HypercubeError, HypercubeIndex, Independence, DEFAULT_EPSILON};
use crate::model::{Evidence, ModelError, Network};
use crate::parser::{emit_hypercubes, emit_report, parse_evidence, parse_network, write_network};
use crate::search::{
    solve_complete_map, solve_delta_ib_map, solve_ib_map, SolveConfig, SolveError, DEFAULT_MAX_EXPANSIONS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "ibmap",
    version,
    about = "MAP and independence-based partial MAP search over Bayesian networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the most probable (partial) assignments given evidence.
    Solve(RunConfig),
    /// Dump every node's maximal hypercubes as JSON.
    InspectHypercubes(InspectArgs),
    /// Check the engine against the brute-force oracle on random networks.
    Verify(VerifyArgs),
    /// Write a random network in `.bn` format.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Map,
    Ib,
    DeltaIb,
}

/// Solution count: a positive number, or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopK(pub Option<usize>);

impl FromStr for TopK {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(TopK(None));
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive count or `all`, got `{s}`")),
            Ok(k) => Ok(TopK(Some(k))),
        }
    }
}

fn parse_unit(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        _ => Err(format!("expected a number in [0, 1], got `{s}`")),
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(format!("expected a non-negative number, got `{s}`")),
    }
}

/// Options of the `solve` subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Network file (`.bn`).
    pub network: PathBuf,
    /// Evidence file (`.ev`); omitted means no evidence.
    pub evidence: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ib")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.0, value_parser = parse_unit)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = parse_epsilon)]
    pub epsilon: f64,
    /// Number of solutions, or `all`.
    #[arg(long, default_value = "1")]
    pub top_k: TopK,
    /// Stop once a solution falls below this fraction of the first.
    #[arg(long, default_value_t = 0.0, value_parser = parse_unit)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_EXPANSIONS)]
    pub max_expansions: u64,
    /// Report solutions even when another reported solution subsumes them.
    #[arg(long)]
    pub no_maximality_filter: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            top_k: self.top_k.0,
            threshold: self.threshold,
            max_expansions: self.max_expansions,
            maximality_filter: !self.no_maximality_filter,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct InspectArgs {
    network: PathBuf,
    /// Use delta-hypercubes with this ratio instead of exact ones.
    #[arg(long, value_parser = parse_unit)]
    delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = parse_epsilon)]
    epsilon: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=10))]
    nodes: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    nodes: u64,
    #[arg(long, default_value_t = 3)]
    max_parents: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    domain_size: u64,
    /// Chance of planting exact independences in each node's table.
    #[arg(long, default_value_t = 0.5, value_parser = parse_unit)]
    planted: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
    /// Output still worth writing, such as a partial report.
    output: Option<String>,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            output: None,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|err| Failure::new(EXIT_USAGE, format!("cannot read {}: {err}", path.display())))
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    let text = read(path)?;
    parse_network(&text).map_err(|err| Failure::new(EXIT_PARSE, format!("{}:{err}", path.display())))
}

fn load_evidence(path: Option<&Path>, net: &Network) -> Result<Evidence, Failure> {
    let Some(path) = path else {
        return Ok(Evidence::none(net));
    };
    let text = read(path)?;
    parse_evidence(&text, net).map_err(|err| Failure::new(EXIT_PARSE, format!("{}:{err}", path.display())))
}

fn hypercube_failure(err: HypercubeError) -> Failure {
    match err {
        HypercubeError::ParentCap { .. } => Failure::new(EXIT_BUDGET, err.to_string()),
        _ => Failure::new(EXIT_USAGE, err.to_string()),
    }
}

fn solve_failure(net: &Network, err: SolveError) -> Failure {
    match err {
        SolveError::EmptyEvidence | SolveError::EvidenceWidth { .. } | SolveError::InvalidParameter(_) => {
            Failure::new(EXIT_USAGE, err.to_string())
        }
        SolveError::Hypercube(err) => hypercube_failure(err),
        SolveError::Model(ModelError::Budget { .. }) => Failure::new(EXIT_BUDGET, err.to_string()),
        SolveError::Model(_) => Failure::new(EXIT_INTERNAL, err.to_string()),
        SolveError::Budget { limit, report } => Failure {
            code: EXIT_BUDGET,
            message: format!("expansion budget of {limit} exhausted; partial report written"),
            output: Some(emit_report(net, &report)),
        },
    }
}

fn solve(args: &RunConfig) -> Result<String, Failure> {
    let net = load_network(&args.network)?;
    let e = load_evidence(args.evidence.as_deref(), &net)?;
    let config = args.solve_config();
    let result = match args.mode {
        ModeArg::Map => solve_complete_map(&net, &e, &config),
        ModeArg::Ib => solve_ib_map(&net, &e, &config),
        ModeArg::DeltaIb => solve_delta_ib_map(&net, &e, &config),
    };
    result
        .map(|report| emit_report(&net, &report))
        .map_err(|err| solve_failure(&net, err))
}

fn inspect(args: &InspectArgs) -> Result<String, Failure> {
    let net = load_network(&args.network)?;
    let independence = match args.delta {
        Some(delta) => Independence::delta(delta),
        None => Independence::exact(args.epsilon),
    };
    let index = HypercubeIndex::new(&net, independence).map_err(hypercube_failure)?;
    Ok(emit_hypercubes(&index))
}

fn run_verify(args: &VerifyArgs) -> Result<String, Failure> {
    let report = verify(args.nodes as usize, args.trials, args.seed)
        .map_err(|err| Failure::new(EXIT_INTERNAL, err.to_string()))?;
    let mut text = serde_json::to_string_pretty(&report).expect("verify report serializes");
    text.push('\n');
    if report.ok {
        Ok(text)
    } else {
        Err(Failure {
            code: EXIT_INTERNAL,
            message: format!("{} oracle disagreements", report.failures.len()),
            output: Some(text),
        })
    }
}

fn run_generate(args: &GenerateArgs) -> Result<String, Failure> {
    let opts = GenerateOptions {
        nodes: args.nodes as usize,
        max_parents: args.max_parents,
        domain_size: args.domain_size as usize,
        planted: args.planted,
        seed: args.seed,
    };
    Ok(write_network(&generate_network(&opts)))
}

fn deliver(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|err| Failure::new(EXIT_USAGE, format!("cannot write {}: {err}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|err| Failure::new(EXIT_INTERNAL, format!("cannot write to stdout: {err}"))),
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = write!(stderr, "{}", err.render());
            return if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (result, output) = match &cli.command {
        Command::Solve(args) => (solve(args), args.output.as_deref()),
        Command::InspectHypercubes(args) => (inspect(args), args.output.as_deref()),
        Command::Verify(args) => (run_verify(args), args.output.as_deref()),
        Command::Generate(args) => (run_generate(args), args.output.as_deref()),
    };
    let outcome = result.and_then(|text| deliver(&text, output, stdout));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            if let Some(text) = &failure.output {
                if let Err(err) = deliver(text, output, stdout) {
                    let _ = writeln!(stderr, "error: {}", err.message);
                }
            }
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}
