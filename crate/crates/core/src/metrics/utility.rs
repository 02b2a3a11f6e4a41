//! Utility metrics (α-nDCG, nDCG, RBP) and their FAIR counterparts.

use std::cmp::Ordering;

use super::{
    dcg, discount, gains_of, ideal_dcg, prefix_kls, Flags, Normalizers, RankProfile, RankRecord, Score,
};
use crate::error::{Error, Result};
use crate::model::{GroupDistribution, MetricConfig, Ranking, Topic};

/// Resolves the top-`k` of a ranking. The flag reports whether the ranking
/// was shorter than `k`.
pub(crate) fn top_k(topic: &Topic, ranking: &Ranking, k: usize) -> Result<(Vec<usize>, bool)> {
    if k == 0 {
        return Err(Error::InvalidConfig("cutoff must be positive".into()));
    }
    let mut docs = topic.resolve(ranking)?;
    let truncated = docs.len() < k;
    docs.truncate(k);
    Ok((docs, truncated))
}

fn normalized(dcg: f64, idcg: f64, truncated: bool) -> Score {
    if idcg <= 0.0 {
        return Score::degenerate(truncated);
    }
    let value = dcg / idcg;
    Score {
        value,
        flags: Flags {
            degenerate: false,
            truncated,
            above_one: value > 1.0 + 1e-12,
        },
    }
}

/// α-nDCG@k: DCG of the ranking's novelty-decayed gains over the ideal DCG
/// (greedy unless configured otherwise). Reported unclamped.
pub fn alpha_ndcg(topic: &Topic, ranking: &Ranking, cfg: &MetricConfig, k: usize) -> Result<Score> {
    let (docs, truncated) = top_k(topic, ranking, k)?;
    let gains = gains_of(topic, &docs, cfg.alpha);
    let ideal = ideal_dcg(topic, k, cfg.alpha, cfg.idcg)?;
    Ok(normalized(dcg(&gains, k), ideal.dcg, truncated))
}

/// Classical nDCG@k on topic-level relevance (max aspect grade).
pub fn ndcg(topic: &Topic, ranking: &Ranking, k: usize) -> Result<Score> {
    let (docs, truncated) = top_k(topic, ranking, k)?;
    let grades: Vec<f64> = docs.iter().map(|&d| topic.relevance(d)).collect();
    let mut ideal: Vec<f64> = (0..topic.pool_size()).map(|d| topic.relevance(d)).collect();
    ideal.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    Ok(normalized(dcg(&grades, k), dcg(&ideal, k), truncated))
}

/// Relevance of a candidate on the [0,1] scale RBP expects: topic-level
/// relevance, divided by the topic's largest grade when that exceeds 1.
pub fn rbp_relevance(topic: &Topic, doc: usize) -> f64 {
    topic.relevance(doc) / rbp_scale(topic)
}

fn rbp_scale(topic: &Topic) -> f64 {
    (0..topic.pool_size()).map(|d| topic.relevance(d)).fold(1.0, f64::max)
}

fn rbp_sum(relevances: impl Iterator<Item = f64>, p: f64) -> f64 {
    (1.0 - p)
        * relevances
            .enumerate()
            .map(|(i, j)| j * p.powi(i as i32))
            .sum::<f64>()
}

fn check_persistence(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("persistence {p} outside (0,1)")))
    }
}

/// Rank-biased precision truncated at `k`: `(1-p)·Σ J(d_i)·p^{i-1}`.
pub fn rbp(topic: &Topic, ranking: &Ranking, p: f64, k: usize) -> Result<f64> {
    check_persistence(p)?;
    let (docs, _) = top_k(topic, ranking, k)?;
    let scale = rbp_scale(topic);
    Ok(rbp_sum(docs.iter().map(|&d| topic.relevance(d) / scale), p))
}

/// RBP of the relevance-sorted pool, truncated at `k`.
fn ideal_rbp(topic: &Topic, p: f64, k: usize) -> f64 {
    let scale = rbp_scale(topic);
    let mut rel: Vec<f64> = (0..topic.pool_size()).map(|d| topic.relevance(d) / scale).collect();
    rel.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    rbp_sum(rel.into_iter().take(k), p)
}

/// FAIR over α-nDCG:
/// `(1/IDCG)·Σ_i G[i] / ((d_KL(D_{r^i}||D*) + 1)·log2(i+1))`.
pub fn fair_alpha_ndcg(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<Score> {
    let (docs, truncated) = top_k(topic, ranking, k)?;
    let target = topic.target(desired, cfg.kl_smoothing_eta)?;
    let gains = gains_of(topic, &docs, cfg.alpha);
    let kls = prefix_kls(topic, &docs, &target)?;
    let ideal = ideal_dcg(topic, k, cfg.alpha, cfg.idcg)?;
    let total: f64 = gains
        .iter()
        .zip(&kls)
        .enumerate()
        .map(|(i, (g, kl))| g / (kl + 1.0) / discount(i + 1))
        .sum();
    Ok(normalized(total, ideal.dcg, truncated))
}

/// FAIR over RBP: `(1/M)·Σ_i (1-p)·J(d_i)·p^{i-1} / (d_KL(D_{r^i}||D*) + 1)`
/// with `M` the RBP of the ideal ordering at `k`.
pub fn fair_rbp(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<Score> {
    let p = cfg.persistence;
    check_persistence(p)?;
    let (docs, truncated) = top_k(topic, ranking, k)?;
    let target = topic.target(desired, cfg.kl_smoothing_eta)?;
    let kls = prefix_kls(topic, &docs, &target)?;
    let scale = rbp_scale(topic);
    let total: f64 = docs
        .iter()
        .zip(&kls)
        .enumerate()
        .map(|(i, (&d, kl))| (1.0 - p) * (topic.relevance(d) / scale) * p.powi(i as i32) / (kl + 1.0))
        .sum();
    Ok(normalized(total, ideal_rbp(topic, p, k), truncated))
}

/// Ratio form for utilities without a per-rank decomposition:
/// `utility / (d_KL(D_{r^k}||D*) + 1)` on the full top-k distribution.
pub fn fair_ratio(
    utility: f64,
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<f64> {
    if !(utility.is_finite() && utility >= 0.0) {
        return Err(Error::InvalidConfig(format!("utility {utility} must be finite and >= 0")));
    }
    let kl = super::kl_at(topic, ranking, desired, cfg, k)?;
    Ok(utility / (kl + 1.0))
}

/// Full per-rank trace at cutoff `k` together with every normalizer.
pub fn rank_profile(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<RankProfile> {
    let (docs, truncated) = top_k(topic, ranking, k)?;
    let target = topic.target(desired, cfg.kl_smoothing_eta)?;
    let gains = gains_of(topic, &docs, cfg.alpha);
    let kls = prefix_kls(topic, &docs, &target)?;
    let per_rank: Vec<RankRecord> = gains
        .iter()
        .zip(&kls)
        .enumerate()
        .map(|(i, (&gain, &kl))| RankRecord {
            gain,
            kl,
            fair_term: gain / (kl + 1.0),
            discount: discount(i + 1),
        })
        .collect();
    let ideal = ideal_dcg(topic, k, cfg.alpha, cfg.idcg)?;
    let dcg = dcg(&gains, k);
    let cumulative = Normalizers {
        dcg,
        idcg: ideal.dcg,
        rbp_ideal: ideal_rbp(topic, cfg.persistence, k),
        z: super::fairness::z_normalizer(docs.len(), cfg.ndrkl_normalizer),
    };
    Ok(RankProfile {
        per_rank,
        cumulative,
        flags: Flags {
            degenerate: ideal.dcg <= 0.0,
            truncated,
            above_one: ideal.dcg > 0.0 && dcg > ideal.dcg + 1e-12,
        },
    })
}
