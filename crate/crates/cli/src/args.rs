use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aps_core::sampler::Mode;
use aps_core::Method;

#[derive(Debug, Parser)]
#[command(
    name = "aps",
    version,
    about = "Adaptive priority sampling of edge streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a stream once and write per-edge estimates.
    Run(RunArgs),
    /// Exact local triangle counts.
    Exact(ExactArgs),
    /// MSE, relative spectral norm and top-k curve over repeated runs.
    Eval(EvalArgs),
    /// Evaluation over a grid of sample fractions and methods.
    Sweep(SweepArgs),
    /// Monte-Carlo check of the estimators against exact counts.
    McCheck(McCheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Aps,
    ApsJs,
    Uniform,
    Triest,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Aps => Method::Aps,
            MethodArg::ApsJs => Method::ApsJs,
            MethodArg::Uniform => Method::Uniform,
            MethodArg::Triest => Method::Triest,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Adaptive,
    Nonadaptive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Adaptive => Mode::Adaptive,
            ModeArg::Nonadaptive => Mode::NonAdaptive,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct StreamArgs {
    /// Whitespace-separated edge list; lines starting with # or % are skipped.
    #[arg(long)]
    pub input: PathBuf,
    /// Seed for shuffling the arrival order.
    #[arg(long, default_value_t = 0, conflicts_with = "no_permute")]
    pub permute_seed: u64,
    /// Keep the file's edge order.
    #[arg(long)]
    pub no_permute: bool,
}

#[derive(Clone, Debug, Args)]
#[group(required = true, multiple = false)]
pub struct BudgetArgs {
    /// Sample size as a fraction of the stream's edges, in (0, 1].
    #[arg(long)]
    pub sample_fraction: Option<f64>,
    /// Sample size in edges.
    #[arg(long)]
    pub sample_size: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct SamplerArgs {
    /// Initial edge weight.
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Adaptive)]
    pub mode: ModeArg,
    /// Sampler seed; repeated runs use seed, seed + 1, ...
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args)]
pub struct OutArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::ApsJs)]
    pub method: MethodArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::ApsJs)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    /// Rows in topk.csv.
    #[arg(long, default_value_t = 100)]
    pub topk: usize,
    /// Precomputed exact.csv; computed from the input when absent.
    #[arg(long)]
    pub exact: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.4, 0.5])]
    pub fractions: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![MethodArg::Aps, MethodArg::ApsJs, MethodArg::Uniform, MethodArg::Triest])]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    #[arg(long)]
    pub exact: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct McCheckArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Aps)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1000)]
    pub runs: u64,
    #[command(flatten)]
    pub out: OutArgs,
}
