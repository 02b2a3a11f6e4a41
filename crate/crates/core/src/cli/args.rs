use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::rankers::ProxyKind;

#[derive(Debug, Parser)]
#[command(name = "fairir", version, about = "Fairness-aware ranking evaluation and re-ranking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the default rankings (run file or bundle order).
    Evaluate(EvalArgs),
    /// Re-rank with FAIR epsilon-greedy and evaluate the result.
    Rerank(RerankArgs),
    /// Evaluate the greedy (or exact) ideal alpha-nDCG ranking.
    Ideal(IdealArgs),
    /// Correlate metric pairs across topics.
    Correlate(CorrelateArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Dataset bundle (JSON) produced by `synth` or a previous import.
    #[arg(long, conflicts_with_all = ["qrels", "run", "groups"])]
    pub bundle: Option<PathBuf>,
    /// Diversity qrels: `topic subtopic docid judgment`.
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Run file: `qid Q0 docid rank score tag`.
    #[arg(long)]
    pub run: Option<PathBuf>,
    /// Group sidecar: `docid group`.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Map positive qrels grades to 1.
    #[arg(long)]
    pub binary: bool,
    /// Derive judgments from the default ranking instead of qrels.
    #[arg(long, value_parser = parse_proxy)]
    pub proxy: Option<ProxyKind>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Desired distribution: uniform, collection, relprop or file:PATH.
    #[arg(long, default_value = "collection", value_parser = parse_desired)]
    pub desired: DesiredArg,
    /// Comma-separated metric names.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "fair,alpha-ndcg,kl,ndrkl")]
    pub metrics: Vec<Metric>,
    /// Comma-separated cutoffs.
    #[arg(long, value_delimiter = ',', default_value = "10,20,50", value_parser = parse_cutoff)]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_open_unit)]
    pub alpha: f64,
    /// RBP persistence.
    #[arg(long, default_value_t = 0.8, value_parser = parse_open_unit)]
    pub p: f64,
    /// KL smoothing weight toward the uniform distribution.
    #[arg(long, default_value_t = 0.0, value_parser = parse_eta)]
    pub eta: f64,
    /// Use exact IDCG for pools of at most N documents.
    #[arg(long, value_name = "N")]
    pub exact_idcg_max: Option<usize>,
    /// nDRKL normalizer.
    #[arg(long, value_enum, default_value = "unit")]
    pub ndrkl_normalizer: NormalizerArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EpsilonArgs {
    #[arg(long, default_value_t = 0.0, value_parser = parse_epsilon)]
    pub epsilon: f64,
    /// Repetitions for 0 < epsilon < 1; ignored otherwise.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Length of produced rankings; defaults to the largest cutoff.
    #[arg(long, value_parser = parse_cutoff)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RerankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[command(flatten)]
    pub ranker: EpsilonArgs,
    /// Also write the produced rankings in run format.
    #[arg(long)]
    pub rankings_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IdealArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Length of the ideal rankings; defaults to the largest cutoff.
    #[arg(long, value_parser = parse_cutoff)]
    pub depth: Option<usize>,
    /// Also write the ideal rankings in run format.
    #[arg(long)]
    pub rankings_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Metric pairs `a:b`, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "fair:ndcg,fair:rbp,fair:kl,fair:ndrkl", value_parser = parse_pair)]
    pub pairs: Vec<(Metric, Metric)>,
    /// Rankers whose (topic, ranking) observations are pooled.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "default")]
    pub rankers: Vec<RankerArg>,
    #[command(flatten)]
    pub ranker: EpsilonArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub topics: usize,
    /// Candidates per topic.
    #[arg(long, default_value_t = 100)]
    pub pool: usize,
    /// Group prior, comma-separated; its length sets the number of groups.
    #[arg(long, value_delimiter = ',', default_value = "0.8,0.2")]
    pub prior: Vec<f64>,
    #[arg(long, default_value_t = 0.6)]
    pub relevance_bias: f64,
    #[arg(long, default_value_t = 0.1)]
    pub base_relevance: f64,
    #[arg(long, default_value_t = 2)]
    pub aspects_per_group: usize,
    #[arg(long, default_value_t = 0.5)]
    pub jitter: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Bundle destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the judgments as diversity qrels.
    #[arg(long)]
    pub qrels_out: Option<PathBuf>,
    /// Also write the default rankings as a run file.
    #[arg(long)]
    pub run_out: Option<PathBuf>,
    /// Also write the group sidecar.
    #[arg(long)]
    pub groups_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Fair,
    FairRbp,
    FairRatio,
    AlphaNdcg,
    Ndcg,
    Rbp,
    Kl,
    Ndkl,
    Ndrkl,
    MinSkew,
    MaxSkew,
    Feasibility,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Fair => "fair",
            Metric::FairRbp => "fair-rbp",
            Metric::FairRatio => "fair-ratio",
            Metric::AlphaNdcg => "alpha-ndcg",
            Metric::Ndcg => "ndcg",
            Metric::Rbp => "rbp",
            Metric::Kl => "kl",
            Metric::Ndkl => "ndkl",
            Metric::Ndrkl => "ndrkl",
            Metric::MinSkew => "min-skew",
            Metric::MaxSkew => "max-skew",
            Metric::Feasibility => "feasibility",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesiredArg {
    Uniform,
    Collection,
    RelevanceProportional,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizerArg {
    Unit,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankerArg {
    Default,
    Ideal,
    Epsilon,
}

fn parse_proxy(s: &str) -> Result<ProxyKind, String> {
    s.parse()
}

fn parse_desired(s: &str) -> Result<DesiredArg, String> {
    match s {
        "uniform" => Ok(DesiredArg::Uniform),
        "collection" => Ok(DesiredArg::Collection),
        "relprop" => Ok(DesiredArg::RelevanceProportional),
        _ => match s.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(DesiredArg::File(PathBuf::from(path))),
            _ => Err(format!("expected uniform, collection, relprop or file:PATH, got `{s}`")),
        },
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("epsilon {v} outside [0,1]"))
    }
}

fn parse_open_unit(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} outside (0,1)"))
    }
}

fn parse_eta(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("eta {v} outside [0,1)"))
    }
}

fn parse_cutoff(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(format!("cutoff `{s}` must be a positive integer")),
    }
}

fn parse_pair(s: &str) -> Result<(Metric, Metric), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("pair `{s}` must look like a:b"))?;
    let metric = |m: &str| Metric::from_str(m, false).map_err(|_| format!("unknown metric `{m}`"));
    Ok((metric(a)?, metric(b)?))
}
