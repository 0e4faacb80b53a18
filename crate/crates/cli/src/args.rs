//! Command-line and config-file parameters.
//!
//! Every parameter struct doubles as the schema of the matching config
//! file: CLI values are serialised (unset flags skipped), laid over the
//! file's fields and the result is deserialised back.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use colspace::{Colouring, ListAssignment};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "colspace", version, about = "Experiments on the space of proper colourings")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config file; flags given on the command line override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file. Relative paths resolve against $COLSPACE_OUTPUT_DIR when set.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the parallel engines.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Record wall-clock duration in the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact number of proper colourings.
    Count(CountArgs),
    /// Uniform samples, one colouring per line.
    Sample(SampleArgs),
    /// Loose, thawed, rigid and frozen flags per vertex.
    Classify(ClassifyArgs),
    /// Cluster size histogram of the distance-t colouring graph.
    Clusters(ClustersArgs),
    /// Evaluate a named closed-form bound.
    Bounds(BoundsArgs),
    /// Exact Bernoulli-domination, negative-correlation and renormalisation checks.
    Dominate(DominateArgs),
    /// Upward percolation on a complete tree.
    Percolate(PercolateArgs),
    /// Greedy or local-search colouring.
    Solve(SolveArgs),
    /// Free energy per vertex and its ratio to the regular-tree value.
    Freeenergy(FreeEnergyArgs),
    /// Run a config file whose `command` field names the subcommand.
    Run,
    /// Run every config of a suite directory and check its expectations.
    Validate {
        dir: PathBuf,
    },
}

fn parse_json<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

/// Graph source. Field names follow the serialised graph family spec, so a
/// config may hold any family object under `graph`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphArgs {
    /// empty, path, cycle, complete, complete_bipartite, rooted_arity_tree,
    /// random_regular, erdos_renyi, erdos_renyi_triangle_erased,
    /// random_forest or from_file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Edge probability of the random families.
    #[arg(long = "edge-p", id = "edge_p")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Seed of the random families.
    #[arg(long = "graph-seed", id = "graph_seed")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_retries: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attach: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<usize>,
    #[arg(long = "tree-arity", id = "tree_arity")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[arg(long = "tree-depth", id = "tree_depth")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Edge-list file for the from_file family.
    #[arg(long = "edge-list", id = "edge_list")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl GraphArgs {
    pub fn is_empty(&self) -> bool {
        serde_json::to_value(self).is_ok_and(|v| v.as_object().is_some_and(|o| o.is_empty()))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountArgs {
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Per-vertex lists as a JSON array of arrays; replaces `--k`.
    #[arg(long, value_parser = parse_json::<ListAssignment>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lists: Option<ListAssignment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Glauber,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_json::<ListAssignment>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lists: Option<ListAssignment>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burnin: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thin: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    /// A single colouring as a JSON array; all colourings when absent.
    #[arg(long, value_parser = parse_json::<Colouring>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colouring: Option<Colouring>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClustersArgs {
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Formula {
    Coupon,
    GeneralisedCoupon,
    RequiredListSize,
    RequiredQ,
    CountingListSize,
    CountLower,
    Bbck,
    TreeFreeEnergy,
    Chernoff,
    ChernoffAbs,
    LowerTail,
    ListTail,
    Percolation,
    Vu,
    LambertW,
    DensityRatio,
}

/// Parameters of the named formulas. `max_degree` is Δ and `delta` is δ.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    /// Graph for `count_lower`, and optionally for `bbck`.
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Expected number of short lists.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deg: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubled: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    /// Leaf probability and arity for the percolation hypothesis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DominateMode {
    Domination,
    NegativeCorrelation,
    Renormalise,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominateArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<DominateMode>,
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_json::<ListAssignment>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lists: Option<ListAssignment>,
    /// Vertices `u` of the indicators `ℓ_σ(u) ≤ threshold`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    /// Instead of a graph: this many independent Bernoulli(p) variables.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independent: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Blocks of variable indices as a JSON array of arrays.
    #[arg(long, value_parser = parse_json::<Vec<Vec<usize>>>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colours: Option<Vec<u32>>,
    /// The fixed colouring outside the closed neighbourhood, as a JSON array.
    #[arg(long, value_parser = parse_json::<Colouring>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinned: Option<Colouring>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercolationModel {
    Iid,
    Exact,
    Adversarial,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolateArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PercolationModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    Greedy,
    LocalSearch,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list_floor: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEnergyArgs {
    #[command(flatten)]
    #[serde(default, skip_serializing_if = "GraphArgs::is_empty")]
    pub graph: GraphArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Degree of the reference tree; the graph's maximum degree by default.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
}
