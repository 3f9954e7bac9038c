//! `polyqram`: synthesis, verification, estimation and optimization runs with
//! a manifest embedded in every report.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyqram::circuit::DecompPolicy;
use polyqram::qram::{QramMode, Variant};
use polyqram::wordfile::WordFormat;
use serde::Serialize;

use output::Format;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "polyqram",
    version,
    about = "Polynomial-encoded QRAM and qLUT toolkit"
)]
pub struct Cli {
    /// Report format; csv and text flatten the JSON document into dotted keys.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a circuit and report its resources.
    #[command(subcommand)]
    Synth(SynthTarget),
    /// Check a circuit exhaustively over every address.
    #[command(subcommand)]
    Verify(VerifyCheck),
    /// Surface-code resource estimate.
    Estimate(EstimateArgs),
    /// Factor a set of bit strings into a low-Toffoli circuit.
    Optimize(OptimizeArgs),
    /// Grover search with a phase-mode QRAM oracle.
    Grover(GroverArgs),
}

#[derive(Debug, Subcommand)]
pub enum SynthTarget {
    Qram(SynthQramArgs),
    Qlut(SynthQlutArgs),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCheck {
    Read(VerifyQramArgs),
    Write(VerifyWriteArgs),
    Phase(VerifyQramArgs),
    Lookup(VerifyLookupArgs),
    /// Compare a circuit against the indicator function of a bit-string set.
    Equiv(VerifyEquivArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitFormat {
    #[default]
    Text,
    Qasm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceRuleArg {
    #[default]
    Paper,
    Reconstructed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    #[default]
    Surface,
    Rough,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CircuitOut {
    /// Write the synthesized circuit to this file.
    #[arg(long = "circuit")]
    pub circuit_path: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CircuitFormat::Text)]
    pub circuit_format: CircuitFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthQramArgs {
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    /// Word size in bits.
    #[arg(short = 'l', long = "word-bits", default_value_t = 1)]
    pub word_bits: usize,
    #[arg(long, default_value = "read")]
    pub mode: QramMode,
    #[arg(long, default_value = "parallel")]
    pub variant: Variant,
    #[arg(long)]
    pub parallel_readout: bool,
    #[arg(long, default_value = "and-gadget")]
    pub decomp: DecompPolicy,
    #[command(flatten)]
    pub circuit: CircuitOut,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    /// Total address bits, split as evenly as possible when --n1/--n2 are absent.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(short = 'l', long = "word-bits", default_value_t = 1)]
    pub word_bits: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WordSource {
    /// Word file, one word per line in hex or binary; random words when absent.
    #[arg(long, visible_alias = "memory")]
    pub table: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    pub word_format: WordFormat,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthQlutArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub words: WordSource,
    #[arg(long, default_value = "and-gadget")]
    pub decomp: DecompPolicy,
    #[command(flatten)]
    pub circuit: CircuitOut,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyQramArgs {
    /// Circuit file (text or QASM); synthesized from the flags when absent.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(short = 'n', long = "n", required_unless_present = "circuit")]
    pub n: Option<usize>,
    #[arg(short = 'l', long = "word-bits", default_value_t = 1)]
    pub word_bits: usize,
    #[arg(long, default_value = "parallel")]
    pub variant: Variant,
    #[arg(long)]
    pub parallel_readout: bool,
    #[command(flatten)]
    pub words: WordSource,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyWriteArgs {
    #[command(flatten)]
    pub common: VerifyQramArgs,
    /// Word on the bus; random when absent.
    #[arg(long)]
    pub bus: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyLookupArgs {
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub words: WordSource,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyEquivArgs {
    /// Circuit with an `input` register and a one-qubit `out`; the optimizer's
    /// circuit when absent.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Bit strings, one per line.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    /// Default surface-code parameters, distances [10, 5], AND gadgets, 1-bit words.
    #[arg(long, conflicts_with_all = ["params", "distances", "distance_rule", "tcount", "tdepth", "clifford_count", "logical_qubits", "word_bits", "decomp"])]
    pub paper_profile: bool,
    #[arg(short = 'n', long = "n")]
    pub n: Option<u32>,
    /// JSON object overriding any of p_in, p_g, t_cycle, threshold_const, qubit_factor, cycles_per_d.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DistanceRuleArg::Paper)]
    pub distance_rule: DistanceRuleArg,
    /// Per-round distances, top round first.
    #[arg(long, value_delimiter = ',')]
    pub distances: Option<Vec<u32>>,
    #[arg(long)]
    pub tcount: Option<f64>,
    #[arg(long)]
    pub tdepth: Option<u64>,
    #[arg(long)]
    pub clifford_count: Option<f64>,
    #[arg(long)]
    pub logical_qubits: Option<f64>,
    #[arg(short = 'l', long = "word-bits", default_value_t = 1)]
    pub word_bits: u64,
    #[arg(long, default_value = "and-gadget")]
    pub decomp: DecompPolicy,
    #[arg(long, value_enum, default_value_t = ReportKind::Surface)]
    pub report: ReportKind,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// String length; required for an empty spec.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[command(flatten)]
    pub circuit: CircuitOut,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GroverArgs {
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub marked: Vec<u64>,
    /// Defaults to floor(pi/4 sqrt(N/k)).
    #[arg(long)]
    pub iterations: Option<usize>,
}

/// Runs ended without an error but may still have failed a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
