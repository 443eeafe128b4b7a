use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rrt_core::experiments::ExperimentKind;

#[derive(Debug, Parser)]
#[command(
    name = "rrt",
    version,
    about = "Random recursive trees, the coalescent coupling and their limit laws"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random recursive tree as a child,parent edge list.
    GenRrt(GenRrtArgs),
    /// Write one coalescent run.
    GenCoalescent(GenCoalescentArgs),
    /// Run an exact enumeration suite.
    Oracle(OracleArgs),
    /// Run a Monte Carlo experiment.
    Exp(Box<ExpArgs>),
    /// Run the structural invariant suite.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed; drawn from entropy and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenRrtArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TraceFormat {
    /// One JSON object per merge (`step, a, b, xi`, trees by rank).
    Jsonl,
    /// Final tree on the original vertex names.
    Edges,
    /// Final tree relabelled to an increasing tree.
    Relabelled,
}

#[derive(Debug, Args)]
pub struct GenCoalescentArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: TraceFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Law of the relabelled coalescent tree is uniform.
    Coupling,
    /// Single-vertex closed forms against flip enumeration.
    Probonevert,
    /// Product form over disjoint selection sets.
    Product,
    /// Label probabilities `1/(n)_k`.
    Labels,
    /// Support of the degree event and its probability given selection sets.
    Degprob,
    /// Exact conditional law given degree thresholds.
    Conditional,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub n: Option<usize>,
    /// Random instances for the probonevert and product suites.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Degree thresholds for the conditional suite, e.g. `2,1`.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Vec<u32>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: rrt_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct ExpArgs {
    /// near-max, moments, cond-degree, fixed-label, tau or h2.
    #[arg(value_parser = parse_kind)]
    pub kind: ExperimentKind,
    /// JSON config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tree size.
    #[arg(long)]
    pub n: Option<u64>,
    /// Number of tracked vertices.
    #[arg(long)]
    pub k: Option<usize>,
    /// Monte Carlo replicates.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated `abs:L`, `pow:A`, `rho:R` or `last`.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Comma-separated `abs:D` or `a:A`.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Vec<String>,
    /// Offsets from the maximal degree for near-max counts.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub j: Vec<i64>,
    /// Factorial moment orders, one per term.
    #[arg(long, value_delimiter = ',')]
    pub orders: Vec<u32>,
    /// One test set per moment term, `x0,x1,y0,y1;...`; repeat per term.
    #[arg(long, allow_hyphen_values = true)]
    pub rects: Vec<String>,
    /// Tree sizes for h2, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<u64>,
    /// Tail thresholds for h2.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// `lo,hi` range of K for tau.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub k_range: Vec<u32>,
    /// Also test labels in cond-degree.
    #[arg(long)]
    pub with_labels: Option<bool>,
    /// Override the KS tolerance of every verdict row.
    #[arg(long)]
    pub ks_tolerance: Option<f64>,
    /// Degree-dependent mark normalisation in `moments`.
    #[arg(long)]
    pub degree_marks: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[command(flatten)]
    pub common: Common,
}
