use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "causalprobe",
    version,
    about = "Counterfactual analysis of causal models and toy networks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Rendering on stdout.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Leave the timestamp out of JSON reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Seed for every random choice; 0 when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON report here (stdout still gets the chosen format).
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
    /// Log more (-v info, -vv debug).
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Evaluate a scenario, optionally under interventions.
    Eval(EvalArgs),
    /// Lewis-style dependence of one event on another.
    Depend(DependArgs),
    /// Minimal sets of causes whose joint removal changes the effect.
    Overdet(OverdetArgs),
    /// Rounds of singleton search with earlier finds held ablated.
    Preempt(PreemptArgs),
    /// Transitivity conditions for a chain A → B → C.
    Transitivity(TransitivityArgs),
    /// Threshold circuit discovery on a network.
    Circuit(CircuitArgs),
    /// Exact, linear and integrated-gradient effects side by side.
    IeCompare(IeCompareArgs),
    /// Write a generated network, dataset or scenario.
    Gen(GenArgs),
    /// Re-render a circuit file.
    Export(ExportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    pub scenario: PathBuf,
    /// Exogenous value, `NAME=VALUE` (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Intervention, `NAME=VALUE` (repeatable).
    #[arg(long = "do", value_name = "NAME=VALUE")]
    pub interventions: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct DependArgs {
    pub scenario: PathBuf,
    /// `NAME` (its actual value) or `NAME=VALUE`.
    #[arg(long)]
    pub cause: String,
    /// `NAME`, `NAME=VALUE`, `NAME>B` or `NAME<B`.
    #[arg(long)]
    pub effect: String,
    /// Counterfactual value of the cause.
    #[arg(long)]
    pub alternate: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Also search for a chain of stepwise dependences.
    #[arg(long)]
    pub chain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationArg {
    Zero,
    Mean,
    Resample,
}

/// Shared by `overdet` and `preempt`: a scenario with `--effect`, or a
/// network with `--dataset` and `--metric`.
#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    /// Scenario or network file.
    pub model: PathBuf,
    /// Effect variable (scenarios).
    #[arg(long)]
    pub effect: Option<String>,
    /// Dataset file (networks).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Target metric (networks): output:I, logit-diff:A,B, nll:I|label, node:REF[:pos|neg].
    #[arg(long, default_value = "output:0")]
    pub metric: String,
    /// Comma-separated candidates; defaults to every ancestor / mediator.
    #[arg(long)]
    pub candidates: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "zero")]
    pub ablation: AblationArg,
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct OverdetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub probe: ProbeArgs,
    #[arg(long = "kmax", default_value_t = 2)]
    pub k_max: usize,
    /// Greedy growth instead of exhaustive enumeration.
    #[arg(long)]
    pub greedy: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PreemptArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub probe: ProbeArgs,
    #[arg(long, default_value_t = 5)]
    pub rounds: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TransitivityArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long)]
    pub c: String,
    /// Check one witness, `a1,a2,b1,b2,c1,c2`.
    #[arg(long, conflicts_with = "search")]
    pub witness: Option<String>,
    /// Search for the first witness passing all five conditions.
    #[arg(long)]
    pub search: bool,
    /// Report every candidate witness.
    #[arg(long)]
    pub sweep: bool,
    /// Also check the two sufficient conditions.
    #[arg(long)]
    pub sufficient: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CircuitArgs {
    pub network: PathBuf,
    pub dataset: PathBuf,
    #[arg(long, default_value = "output:0")]
    pub metric: String,
    #[arg(long, default_value_t = causalprobe::circuits::DEFAULT_NODE_THRESHOLD)]
    pub tn: f64,
    #[arg(long, default_value_t = causalprobe::circuits::DEFAULT_EDGE_THRESHOLD)]
    pub te: f64,
    /// Compare signed effects against the thresholds.
    #[arg(long)]
    pub signed: bool,
    /// exact, linear or ig[:STEPS].
    #[arg(long, default_value = "exact")]
    pub estimator: String,
    #[arg(long, value_enum, default_value = "zero")]
    pub ablation: AblationArg,
    /// Anchor for local dependency expansion (repeatable, applied in order).
    #[arg(long, value_name = "NODE")]
    pub expand: Vec<String>,
    /// Admit members of minimal ablation sets up to this size.
    #[arg(long, value_name = "K")]
    pub set_search: Option<usize>,
    /// Admit causes found in later preemption rounds.
    #[arg(long, value_name = "ROUNDS")]
    pub preemption_rounds: Option<usize>,
    /// Write circuit.json, circuit.dot and circuit.csv here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IeCompareArgs {
    pub network: PathBuf,
    pub dataset: PathBuf,
    #[arg(long, default_value = "output:0")]
    pub metric: String,
    #[arg(long, value_enum, default_value = "zero")]
    pub ablation: AblationArg,
    #[arg(long, default_value_t = 64)]
    pub ig_steps: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Generator name.
    pub name: String,
    /// Output directory (created if missing).
    pub out_dir: PathBuf,
    /// Train the succession network before writing it.
    #[arg(long)]
    pub train: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    pub circuit: PathBuf,
}
