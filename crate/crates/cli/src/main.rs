//! `rep`: command-line front end for remote entanglement preparation
//! simulations, resource-graph tools and purification threshold sweeps.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rep", version, about = "Remote entanglement preparation simulator")]
pub struct Cli {
    /// Worker threads for sweep commands (defaults to all cores).
    #[arg(long, global = true, env = "REP_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every command.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Seed of the random number generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format (CSV for purification commands, JSON otherwise).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Remote preparation runs.
    #[command(subcommand)]
    Rep(RepCmd),
    /// Compile a phase-gate circuit into a measurement protocol.
    Compile(CompileArgs),
    /// Graph-state tools.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Purification of noisy graph-state resources.
    #[command(subcommand)]
    Purify(PurifyCmd),
    /// Positive-partial-transpose checks.
    #[command(subcommand)]
    Ppt(PptCmd),
    /// Classical communication over locally maximally entanglable states.
    #[command(subcommand)]
    Lme(LmeCmd),
}

#[derive(Subcommand, Debug)]
pub enum RepCmd {
    /// Prepare a canonical-form state on n = 2 or 3 qubits.
    Run(RepRunArgs),
    /// Prepare a state of the three-qubit family with α3 = α4 = π/4.
    Mes(RepMesArgs),
    /// Compare message statistics of two parameter sets.
    Audit(AuditArgs),
}

#[derive(Args, Debug)]
pub struct RepRunArgs {
    /// Number of qubits.
    #[arg(long)]
    pub n: usize,
    /// Comma-separated phase parameters (radians).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random")]
    pub angles: Option<Vec<f64>>,
    /// Draw the parameters uniformly from [-π, π).
    #[arg(long)]
    pub random: bool,
    /// Number of runs.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug)]
pub struct RepMesArgs {
    /// Parameters α1,α2,α5 (radians).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random")]
    pub angles: Option<Vec<f64>>,
    /// Draw the parameters uniformly from [-π, π).
    #[arg(long)]
    pub random: bool,
    /// Number of runs.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditFamily {
    Cf2,
    Cf3,
    Mes,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long, value_enum, default_value = "cf3")]
    pub family: AuditFamily,
    /// First parameter set (random when omitted).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Second parameter set (random when omitted).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<f64>>,
    /// Runs per parameter set.
    #[arg(long, default_value_t = 8192)]
    pub runs: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// Canonical-form circuit on n qubits.
    #[arg(long, conflicts_with_all = ["mes", "circuit"])]
    pub n: Option<usize>,
    /// Three-qubit circuit with α3 = α4 = π/4.
    #[arg(long)]
    pub mes: bool,
    /// JSON gate sequence {n, gates: [{kind, qubits, angle | slot}]}.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Realize Clifford-angle phase gates with ancillas as well.
    #[arg(long)]
    pub all_gadgets: bool,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    /// Chromatic number and an optimal colouring.
    Color(GraphArgs),
    /// Local-complementation orbit.
    LcOrbit(LcOrbitArgs),
    /// Whether two graphs are related by local complementations.
    LcEquiv(LcEquivArgs),
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    /// Built-in id (rep8, mes6) or a JSON file {n, edges: [[i, j], ...]}.
    #[arg(long)]
    pub graph: String,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug)]
pub struct LcOrbitArgs {
    /// Built-in id (rep8, mes6) or a JSON file.
    #[arg(long)]
    pub graph: String,
    /// Report only whether (and which) a bipartite member exists.
    #[arg(long)]
    pub find_bipartite: bool,
    /// Abort when the orbit exceeds this many members.
    #[arg(long, default_value_t = 65536)]
    pub max: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug)]
pub struct LcEquivArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, default_value_t = 65536)]
    pub max: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug)]
pub enum PurifyCmd {
    /// Threshold noise parameter p* for one scenario.
    Threshold(ThresholdArgs),
    /// Convergence over a (p, q) grid.
    Sweep(SweepArgs),
    /// Thresholds with two transmitted qubits, for every retained qubit.
    Variants(VariantArgs),
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Built-in id (rep8, mes6) or a JSON file.
    #[arg(long)]
    pub graph: String,
    /// Survival parameter of the local noise on every qubit.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Comma-separated transmitted vertices, 0-based (built-in default otherwise).
    #[arg(long, value_delimiter = ',')]
    pub transmitted: Option<Vec<usize>>,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Fill the `seconds` column with wall-clock times (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: String,
    /// Comma-separated q values.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub q: Vec<f64>,
    /// p grid as start:stop:step.
    #[arg(long, default_value = "0.3:0.7:0.02")]
    pub p: String,
    #[arg(long, value_delimiter = ',')]
    pub transmitted: Option<Vec<usize>>,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Args, Debug)]
pub struct VariantArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug)]
pub enum PptCmd {
    /// PPT boundary of the depolarized three-qubit W state.
    Wstate(WstateArgs),
}

#[derive(Args, Debug)]
pub struct WstateArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also tabulate the minimum eigenvalue on this many grid points.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug)]
pub enum LmeCmd {
    /// Send bits over the σ3 corrections of an LMES preparation.
    Send(LmeSendArgs),
}

#[derive(Args, Debug)]
pub struct LmeSendArgs {
    /// JSON spec {n, gates: [{support, angle}]}.
    #[arg(long)]
    pub spec: PathBuf,
    /// Payload as a hexadecimal number.
    #[arg(long)]
    pub bits: String,
    /// Payload length in bits (defaults to the extraction capacity).
    #[arg(long)]
    pub nbits: Option<usize>,
    /// Independent set used for extraction, 0-based.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<usize>>,
    #[command(flatten)]
    pub config: RunConfig,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
