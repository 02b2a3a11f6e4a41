//! Command-line front end. Exit codes: 0 success, 1 data error, 2 usage
//! error.

mod args;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::Path;

use clap::Parser;
use rayon::prelude::*;

pub use args::{
    Cli, Command, CorrelateArgs, DesiredArg, EpsilonArgs, EvalArgs, FormatArg, IdealArgs, InputArgs, Metric,
    MetricArgs, NormalizerArg, OutputArgs, RankerArg, RerankArgs, SynthArgs,
};

use crate::error::{Error, Result};
use crate::io::{
    assemble, generate_synthetic, load_bundle, parse_desired, parse_groups, parse_qrels, parse_run, read_file,
    write_correlations, write_file, write_groups, write_qrels, write_report, write_run, CorrelationRow, Provenance,
    ReportFormat, ReportRow, SynthSpec,
};
use crate::metrics::{
    alpha_ndcg, exact_ideal, fair_alpha_ndcg, fair_ratio, fair_rbp, feasibility, kl_at, ndcg, ndkl, ndrkl, rbp, skew,
    Flags,
};
use crate::model::{
    build_desired_distribution, FairnessNotion, GroupDistribution, IdcgMode, MetricConfig, NdrklNormalizer, Ranking,
    Topic, TopicId,
};
use crate::rankers::{epsilon_greedy_with, greedy_ideal_ranker, passthrough, proxy_topic, stream_rng, to_ranking};
use crate::stats::{aggregate, pearson, spearman, Aggregation, MetricSeries};

/// How a command failed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Data(e) => eprintln!("error: {e}"),
            }
            f.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::Rerank(a) => rerank(a),
        Command::Ideal(a) => ideal(a),
        Command::Correlate(a) => correlate(a),
        Command::Synth(a) => synth(a),
    }
}

struct Dataset {
    topics: Vec<Topic>,
    label: String,
}

fn load(input: &InputArgs) -> Result<Dataset> {
    let (bundle, label) = match &input.bundle {
        Some(path) => {
            let bundle = load_bundle(path)?;
            if input.proxy.is_none() && bundle.topics.iter().all(|t| t.judgments().is_empty()) {
                return Err(Error::MissingInput(format!(
                    "{} has no relevance judgments; pass --proxy",
                    path.display()
                )));
            }
            (bundle, "default".to_owned())
        }
        None => {
            if input.qrels.is_none() && input.run.is_none() {
                return Err(Error::MissingInput("--bundle, or --qrels and/or --run".into()));
            }
            if input.qrels.is_none() && input.proxy.is_none() {
                return Err(Error::MissingInput(
                    "--qrels (or --proxy to derive judgments from the run)".into(),
                ));
            }
            let qrels = input
                .qrels
                .as_deref()
                .map(|p| parse_qrels(&p.display().to_string(), &read_file(p)?, input.binary))
                .transpose()?;
            let run = input
                .run
                .as_deref()
                .map(|p| parse_run(&p.display().to_string(), &read_file(p)?))
                .transpose()?;
            let groups = input
                .groups
                .as_deref()
                .map(|p| parse_groups(&p.display().to_string(), &read_file(p)?))
                .transpose()?;
            let sources = [&input.qrels, &input.run, &input.groups]
                .into_iter()
                .flatten()
                .map(|p| p.display().to_string())
                .collect();
            let provenance = Provenance {
                sources,
                format: "trec".into(),
                warnings: Vec::new(),
            };
            let bundle = assemble(qrels.as_ref(), run.as_ref(), groups.as_ref(), input.binary, provenance)?;
            let label = match run.as_ref().map(|r| &r.tags) {
                Some(tags) if tags.len() == 1 => tags.iter().next().cloned().unwrap_or_default(),
                _ => "default".to_owned(),
            };
            (bundle, label)
        }
    };
    for w in &bundle.provenance.warnings {
        eprintln!("warning: {w}");
    }
    let topics = match input.proxy {
        Some(kind) => bundle
            .topics
            .iter()
            .map(|t| proxy_topic(t, kind))
            .collect::<Result<Vec<_>>>()?,
        None => bundle.topics,
    };
    Ok(Dataset { topics, label })
}

/// Metric settings shared by every topic.
struct Plan {
    cfg: MetricConfig,
    exact_max: Option<usize>,
    notion: FairnessNotion,
}

impl Plan {
    fn new(m: &MetricArgs) -> Result<Self> {
        let cfg = MetricConfig {
            alpha: m.alpha,
            persistence: m.p,
            cutoffs: m.k.clone(),
            kl_smoothing_eta: m.eta,
            binary_relevance: false,
            idcg: IdcgMode::Greedy,
            ndrkl_normalizer: match m.ndrkl_normalizer {
                NormalizerArg::Unit => NdrklNormalizer::Unit,
                NormalizerArg::Printed => NdrklNormalizer::Printed,
            },
        };
        cfg.validate()?;
        let notion = match &m.desired {
            DesiredArg::Uniform => FairnessNotion::Uniform,
            DesiredArg::Collection => FairnessNotion::Collection,
            DesiredArg::RelevanceProportional => FairnessNotion::RelevanceProportional,
            DesiredArg::File(path) => {
                FairnessNotion::Explicit(parse_desired(&path.display().to_string(), &read_file(path)?)?)
            }
        };
        Ok(Self {
            cfg,
            exact_max: m.exact_idcg_max,
            notion,
        })
    }

    /// Exact IDCG when the pool fits the bound, greedy otherwise.
    fn config_for(&self, topic: &Topic) -> MetricConfig {
        let mut cfg = self.cfg.clone();
        if let Some(max_pool) = self.exact_max {
            if topic.pool_size() <= max_pool {
                cfg.idcg = IdcgMode::Exact { max_pool };
            }
        }
        cfg
    }

    fn depth(&self, requested: Option<usize>) -> usize {
        requested.unwrap_or_else(|| self.cfg.cutoffs.iter().copied().max().unwrap_or(10))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Algorithm {
    Default,
    Ideal,
    Epsilon { epsilon: f64, runs: usize, seed: u64 },
}

impl Algorithm {
    fn epsilon(a: &EpsilonArgs) -> Self {
        let randomized = a.epsilon > 0.0 && a.epsilon < 1.0;
        Algorithm::Epsilon {
            epsilon: a.epsilon,
            runs: if randomized { a.runs as usize } else { 1 },
            seed: a.seed,
        }
    }

    fn label(&self, data: &Dataset, plan: &Plan) -> String {
        match self {
            Algorithm::Default => data.label.clone(),
            Algorithm::Ideal if plan.exact_max.is_some() => "ideal".into(),
            Algorithm::Ideal => "greedy-ideal".into(),
            Algorithm::Epsilon { epsilon, .. } => format!("fair-eps{epsilon}"),
        }
    }
}

/// A metric value, or `None` when the topic is degenerate for it.
type Cell = Option<(f64, Flags)>;

struct TopicOutcome {
    id: TopicId,
    /// Indexed `[metric][cutoff]`.
    cells: Vec<Vec<Cell>>,
    rankings: Vec<Ranking>,
}

fn produce(topic: &Topic, algo: Algorithm, desired: &GroupDistribution, cfg: &MetricConfig, depth: usize) -> Result<Vec<Ranking>> {
    match algo {
        Algorithm::Default => Ok(vec![passthrough(topic, depth)?.0]),
        Algorithm::Ideal => match cfg.idcg {
            IdcgMode::Exact { max_pool } => {
                let ideal = exact_ideal(topic, depth, cfg.alpha, max_pool)?;
                Ok(vec![to_ranking(topic, &ideal.docs)])
            }
            IdcgMode::Greedy => Ok(vec![greedy_ideal_ranker(topic, depth, cfg.alpha)]),
        },
        Algorithm::Epsilon { epsilon, runs, seed } => (0..runs)
            .map(|r| {
                let mut rng = stream_rng(seed, r, topic.id().as_str());
                Ok(epsilon_greedy_with(topic, desired, epsilon, depth, cfg, &mut rng)?.ranking)
            })
            .collect(),
    }
}

fn measure(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    metric: Metric,
    k: usize,
) -> Result<Cell> {
    let truncated = Flags {
        truncated: ranking.len() < k,
        ..Flags::default()
    };
    let score = |s: crate::metrics::Score| {
        if s.flags.degenerate {
            None
        } else {
            Some((s.value, s.flags.merge(truncated)))
        }
    };
    let plain = |v: f64| Some((v, truncated));
    Ok(match metric {
        Metric::Fair => score(fair_alpha_ndcg(topic, ranking, desired, cfg, k)?),
        Metric::FairRbp => score(fair_rbp(topic, ranking, desired, cfg, k)?),
        Metric::FairRatio => match score(ndcg(topic, ranking, k)?) {
            Some((u, flags)) => Some((fair_ratio(u, topic, ranking, desired, cfg, k)?, flags)),
            None => None,
        },
        Metric::AlphaNdcg => score(alpha_ndcg(topic, ranking, cfg, k)?),
        Metric::Ndcg => score(ndcg(topic, ranking, k)?),
        Metric::Rbp => plain(rbp(topic, ranking, cfg.persistence, k)?),
        Metric::Kl => plain(kl_at(topic, ranking, desired, cfg, k)?),
        Metric::Ndkl => plain(ndkl(topic, ranking, desired, cfg, k)?),
        Metric::Ndrkl => plain(ndrkl(topic, ranking, desired, cfg, k)?),
        Metric::MinSkew => plain(skew(topic, ranking, desired, cfg, k)?.min),
        Metric::MaxSkew => plain(skew(topic, ranking, desired, cfg, k)?.max),
        Metric::Feasibility => plain(feasibility(topic, ranking, desired, k)?.feasible_up_to as f64),
    })
}

fn outcome_for(
    topic: &Topic,
    algo: Algorithm,
    plan: &Plan,
    metrics: &[Metric],
    depth: usize,
    keep_rankings: bool,
) -> Result<TopicOutcome> {
    let cfg = plan.config_for(topic);
    let desired = build_desired_distribution(topic, &plan.notion)?;
    let rankings = produce(topic, algo, &desired, &cfg, depth)?;
    let mut cells = Vec::with_capacity(metrics.len());
    for &metric in metrics {
        let mut row = Vec::with_capacity(cfg.cutoffs.len());
        for &k in &cfg.cutoffs {
            let mut sum = 0.0;
            let mut flags = Flags::default();
            let mut degenerate = false;
            for ranking in &rankings {
                match measure(topic, ranking, &desired, &cfg, metric, k)? {
                    Some((v, f)) => {
                        sum += v;
                        flags = flags.merge(f);
                    }
                    None => degenerate = true,
                }
            }
            row.push((!degenerate).then(|| (sum / rankings.len() as f64, flags)));
        }
        cells.push(row);
    }
    Ok(TopicOutcome {
        id: topic.id().clone(),
        cells,
        rankings: if keep_rankings { rankings } else { Vec::new() },
    })
}

/// Per-topic outcomes in topic-id order; the first failing topic in that
/// order determines the error.
fn outcomes(
    data: &Dataset,
    algo: Algorithm,
    plan: &Plan,
    metrics: &[Metric],
    depth: usize,
    keep_rankings: bool,
) -> Result<Vec<TopicOutcome>> {
    let mut results: Vec<(&TopicId, Result<TopicOutcome>)> = data
        .topics
        .par_iter()
        .map(|t| (t.id(), outcome_for(t, algo, plan, metrics, depth, keep_rankings)))
        .collect();
    results.sort_by(|a, b| a.0.cmp(b.0));
    results
        .into_iter()
        .map(|(id, r)| {
            r.map_err(|e| match e {
                Error::InvalidTopic { .. } => e,
                other => Error::topic(id.as_str(), other.to_string()),
            })
        })
        .collect()
}

fn report_rows(algorithm: &str, metrics: &[Metric], cutoffs: &[usize], outcomes: &[TopicOutcome]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (mi, metric) in metrics.iter().enumerate() {
        for (ki, &k) in cutoffs.iter().enumerate() {
            let mut series = MetricSeries::new(metric.name());
            let mut flags = Flags::default();
            for o in outcomes {
                match o.cells[mi][ki] {
                    Some((v, f)) => {
                        series.push(o.id.clone(), k, v)?;
                        flags = flags.merge(f);
                    }
                    None => series.exclude(),
                }
            }
            flags.degenerate = series.excluded > 0;
            rows.push(ReportRow {
                algorithm: algorithm.to_owned(),
                metric: metric.name().to_owned(),
                k,
                mean: aggregate(&series, k, Aggregation::Mean)?,
                min: aggregate(&series, k, Aggregation::Min)?,
                max: aggregate(&series, k, Aggregation::Max)?,
                excluded: series.excluded,
                flags: flags.labels().into_iter().map(String::from).collect(),
            });
        }
    }
    Ok(rows)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
    }
}

fn report_format(f: FormatArg) -> ReportFormat {
    match f {
        FormatArg::Tsv => ReportFormat::Tsv,
        FormatArg::Json => ReportFormat::Structured,
    }
}

fn evaluate_and_report(
    input: &InputArgs,
    margs: &MetricArgs,
    output: &OutputArgs,
    algo: Algorithm,
    depth: Option<usize>,
    rankings_out: Option<&Path>,
) -> Result<(), Failure> {
    let plan = Plan::new(margs)?;
    let data = load(input)?;
    let depth = plan.depth(depth);
    let label = algo.label(&data, &plan);
    let results = outcomes(&data, algo, &plan, &margs.metrics, depth, rankings_out.is_some())?;
    let rows = report_rows(&label, &margs.metrics, &plan.cfg.cutoffs, &results)?;
    emit(output.out.as_deref(), &write_report(&rows, report_format(output.format)))?;
    if let Some(path) = rankings_out {
        let mut text = String::new();
        for o in &results {
            for (r, ranking) in o.rankings.iter().enumerate() {
                let tag = if o.rankings.len() > 1 { format!("{label}.r{r}") } else { label.clone() };
                text.push_str(&write_run([(&o.id, ranking.items())], &tag));
            }
        }
        write_file(path, &text)?;
    }
    Ok(())
}

fn evaluate(a: &EvalArgs) -> Result<(), Failure> {
    evaluate_and_report(&a.input, &a.metrics, &a.output, Algorithm::Default, None, None)
}

fn rerank(a: &RerankArgs) -> Result<(), Failure> {
    evaluate_and_report(
        &a.input,
        &a.metrics,
        &a.output,
        Algorithm::epsilon(&a.ranker),
        a.ranker.depth,
        a.rankings_out.as_deref(),
    )
}

fn ideal(a: &IdealArgs) -> Result<(), Failure> {
    evaluate_and_report(&a.input, &a.metrics, &a.output, Algorithm::Ideal, a.depth, a.rankings_out.as_deref())
}

fn correlate(a: &CorrelateArgs) -> Result<(), Failure> {
    let plan = Plan::new(&a.metrics)?;
    let data = load(&a.input)?;
    let depth = plan.depth(a.ranker.depth);
    let mut metrics: Vec<Metric> = Vec::new();
    for &(x, y) in &a.pairs {
        for m in [x, y] {
            if !metrics.contains(&m) {
                metrics.push(m);
            }
        }
    }
    let mut rankers = a.rankers.clone();
    rankers.dedup();
    let mut pooled = Vec::new();
    for r in rankers {
        let algo = match r {
            RankerArg::Default => Algorithm::Default,
            RankerArg::Ideal => Algorithm::Ideal,
            RankerArg::Epsilon => Algorithm::epsilon(&a.ranker),
        };
        pooled.extend(outcomes(&data, algo, &plan, &metrics, depth, false)?);
    }
    let index = |m: Metric| metrics.iter().position(|&x| x == m).expect("pair metrics collected");
    let mut rows = Vec::new();
    for &(x, y) in &a.pairs {
        let (xi, yi) = (index(x), index(y));
        for (ki, &k) in plan.cfg.cutoffs.iter().enumerate() {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pooled
                .iter()
                .filter_map(|o| Some((o.cells[xi][ki]?.0, o.cells[yi][ki]?.0)))
                .unzip();
            let pair = format!("{}:{}", x.name(), y.name());
            let annotate = |e: Error| match e {
                Error::UndefinedCorrelation(m) => Error::UndefinedCorrelation(format!("{pair} at k={k}: {m}")),
                other => other,
            };
            rows.push(CorrelationRow {
                pearson: pearson(&xs, &ys).map_err(annotate)?,
                spearman: spearman(&xs, &ys).map_err(annotate)?,
                pair,
                k,
            });
        }
    }
    let text = match a.output.format {
        FormatArg::Tsv => write_correlations(&rows),
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("correlations serialize");
            s.push('\n');
            s
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let spec = SynthSpec {
        topics: a.topics,
        pool: a.pool,
        prior: a.prior.clone(),
        relevance_bias: a.relevance_bias,
        base_relevance: a.base_relevance,
        aspects_per_group: a.aspects_per_group,
        jitter: a.jitter,
        seed: a.seed,
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let bundle = generate_synthetic(&spec)?;
    emit(a.out.as_deref(), &bundle.to_json())?;
    if let Some(path) = &a.qrels_out {
        write_file(path, &write_qrels(&bundle))?;
    }
    if let Some(path) = &a.groups_out {
        write_file(path, &write_groups(&bundle))?;
    }
    if let Some(path) = &a.run_out {
        let run = bundle
            .topics
            .iter()
            .map(|t| write_run([(t.id(), t.default_ranking())], "synthetic"))
            .collect::<String>();
        write_file(path, &run)?;
    }
    Ok(())
}
