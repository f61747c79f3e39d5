use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "infoproc",
    version,
    about = "Information-processing features of cellular automata and time series"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Key-value file of default flag values (`key = value` per line).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (overrides INFOPROC_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exact feature matrix of all 256 rules.
    EcaFeatures(EcaFeaturesArgs),
    /// Principal feature sets, baselines and the power-versus-time curve.
    Predict(PredictArgs),
    /// Complete-linkage dendrogram of the rules.
    Cluster(ClusterArgs),
    /// λ parameters and closed-form one-step information of all rules.
    Lambda(LambdaArgs),
    /// One-step information along transients of a finite ring.
    Transient(TransientArgs),
    /// Sliding-window memory, transfer and integration of a panel.
    Ts(TsArgs),
    /// Synthetic chain panel with a regime change.
    Synth(SynthArgs),
    /// Repeat a run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    PerStep,
    Cumulative,
}

#[derive(Debug, Args, Serialize)]
pub struct EcaFeaturesArgs {
    /// Time step t ≥ 1.
    #[arg(long, short)]
    pub t: usize,
    #[arg(long, value_enum, default_value = "per-step")]
    pub mode: ModeArg,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchArg {
    Auto,
    Exhaustive,
    Beam,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long, default_value_t = 3)]
    pub t_max: usize,
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    /// Class-label permutations per baseline; 0 skips baselines.
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-run the selection for every permutation instead of fixing the set.
    #[arg(long)]
    pub reselect: bool,
    /// Class table CSV ("rule,class"); the bundled table by default.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Decimal places kept when symbolizing feature values.
    #[arg(long, default_value_t = 10)]
    pub precision: u32,
    #[arg(long, value_enum, default_value = "auto")]
    pub search: SearchArg,
    #[arg(long, default_value_t = 10)]
    pub beam_width: usize,
    #[arg(long, value_enum, default_value = "per-step")]
    pub mode: ModeArg,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    Iid,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorArg {
    /// Memory, transfer and integration per step.
    Summary,
    /// Every per-step feature.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Json,
    Newick,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long, value_enum, default_value = "iid")]
    pub source: SourceArg,
    /// Feature steps for the iid source.
    #[arg(long, short, default_value_t = 1)]
    pub t: usize,
    /// Ring size for the stationary source.
    #[arg(long, short, default_value_t = 15)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "summary")]
    pub vector: VectorArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaArgs {
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TransientArgs {
    #[arg(long, default_value_t = 110)]
    pub rule: u32,
    #[arg(long, short, default_value_t = 15)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub t_max: usize,
    /// Initial states; every state is enumerated when 2^N ≤ samples.
    #[arg(long, default_value_t = 32768)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitArg {
    Nats,
    Bits,
}

#[derive(Debug, Args, Serialize)]
pub struct TsArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Comma-separated variable order; the file's column order by default.
    #[arg(long, value_delimiter = ',')]
    pub chain: Vec<String>,
    /// Window lengths in samples; several values write one file each.
    #[arg(long, short, value_delimiter = ',', default_value = "1400")]
    pub window: Vec<usize>,
    /// Detrending kernel width in samples.
    #[arg(long, required_unless_present = "no_detrend")]
    pub sigma: Option<f64>,
    /// Skip detrending.
    #[arg(long)]
    pub no_detrend: bool,
    #[arg(long, short, default_value_t = 1)]
    pub delay: usize,
    #[arg(long, short, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub stride: usize,
    /// Jitter seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "nats")]
    pub unit: UnitArg,
    /// Also write a JSON trajectory with the resolved configuration.
    #[arg(long)]
    pub json: bool,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = infoproc_series::synth::BUNDLED_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub variables: usize,
    #[arg(long, default_value_t = 4000)]
    pub length: usize,
    #[arg(long, default_value_t = 2000)]
    pub split: usize,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub pre_ar: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pre_coupling: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub post_ar: f64,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub post_coupling: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RerunArgs {
    /// Manifest written next to an earlier output.
    #[arg(long, short)]
    pub manifest: PathBuf,
    /// Only compare the regenerated outputs with the recorded digests.
    #[arg(long)]
    pub check: bool,
}
