//! Fairness metrics over the prefix group distributions of a ranking.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::utility::top_k;
use super::{discount, kl_dense, prefix_kls};
use crate::error::{Error, Result};
use crate::model::{GroupDistribution, GroupId, MetricConfig, NdrklNormalizer, PrefixState, Ranking, Topic};

pub(crate) fn z_normalizer(k: usize, normalizer: NdrklNormalizer) -> f64 {
    (1..=k)
        .map(|i| match normalizer {
            NdrklNormalizer::Unit => 1.0 / discount(i),
            NdrklNormalizer::Printed => 1.0 / (i as f64 * discount(i)),
        })
        .sum()
}

/// `d_KL(D_{r^k} || D*)` of the full top-k distribution.
pub fn kl_at(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<f64> {
    let (docs, _) = top_k(topic, ranking, k)?;
    let target = topic.target(desired, cfg.kl_smoothing_eta)?;
    let state = PrefixState::from_prefix(topic, &docs);
    kl_dense(&state.dense_distribution()?, &target)
}

/// Normalized discounted KL: `(1/Z)·Σ_i d_KL(D_{r^i}||D*)/log2(i+1)` with
/// `Z = Σ_i 1/log2(i+1)`. Lower is fairer.
pub fn ndkl(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<f64> {
    let (docs, _) = top_k(topic, ranking, k)?;
    if docs.is_empty() {
        return Err(Error::EmptyPrefix);
    }
    let target = topic.target(desired, cfg.kl_smoothing_eta)?;
    let kls = prefix_kls(topic, &docs, &target)?;
    let total: f64 = kls.iter().enumerate().map(|(i, kl)| kl / discount(i + 1)).sum();
    Ok(total / z_normalizer(docs.len(), NdrklNormalizer::Unit))
}

/// Normalized discounted reciprocal KL:
/// `(1/Z)·Σ_i 1/((d_KL(D_{r^i}||D*) + 1)·log2(i+1))`. Higher is fairer; with
/// the default normalizer the range is (0, 1].
pub fn ndrkl(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<f64> {
    let (docs, _) = top_k(topic, ranking, k)?;
    if docs.is_empty() {
        return Err(Error::EmptyPrefix);
    }
    let target = topic.target(desired, cfg.kl_smoothing_eta)?;
    let kls = prefix_kls(topic, &docs, &target)?;
    let total: f64 = kls
        .iter()
        .enumerate()
        .map(|(i, kl)| 1.0 / ((kl + 1.0) * discount(i + 1)))
        .sum();
    Ok(total / z_normalizer(docs.len(), cfg.ndrkl_normalizer))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skew {
    /// `ln(p_ranked / p_desired)` per group.
    pub per_group: BTreeMap<GroupId, f64>,
    pub min: f64,
    pub max: f64,
}

/// Log-ratio of each group's top-k share to its desired share.
///
/// Both shares are mixed with `eta·uniform` over the union of groups. A
/// group missing from the top-k yields `-inf` when `eta = 0`.
pub fn skew(
    topic: &Topic,
    ranking: &Ranking,
    desired: &GroupDistribution,
    cfg: &MetricConfig,
    k: usize,
) -> Result<Skew> {
    let eta = cfg.kl_smoothing_eta;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidConfig(format!("smoothing eta {eta} outside [0,1)")));
    }
    let (docs, _) = top_k(topic, ranking, k)?;
    let state = PrefixState::from_prefix(topic, &docs);
    let observed = state.distribution(topic)?;
    let universe: BTreeSet<&GroupId> = observed.groups().chain(desired.groups()).collect();
    let uniform = 1.0 / universe.len() as f64;

    let mut per_group = BTreeMap::new();
    for g in universe {
        let q = (1.0 - eta) * desired.get(g) + eta * uniform;
        if q == 0.0 {
            return Err(Error::InfiniteDivergence(g.to_string()));
        }
        let p = (1.0 - eta) * observed.get(g) + eta * uniform;
        per_group.insert(g.clone(), (p / q).ln());
    }
    let min = per_group.values().copied().fold(f64::INFINITY, f64::min);
    let max = per_group.values().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Skew { per_group, min, max })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    /// 1-based ranks at which some group falls below its floor.
    pub violated_positions: BTreeSet<usize>,
    /// Length of the longest violation-free leading prefix.
    pub feasible_up_to: usize,
}

/// Floor constraints: rank `i` is violated when some group's fractional
/// count in the top-`i` is below `floor(i·desired(g))`.
pub fn feasibility(topic: &Topic, ranking: &Ranking, desired: &GroupDistribution, k: usize) -> Result<Feasibility> {
    let (docs, _) = top_k(topic, ranking, k)?;
    let mut state = PrefixState::new(topic);
    let mut violated_positions = BTreeSet::new();
    for (i, &d) in docs.iter().enumerate() {
        state.push(topic, d);
        let rank = i + 1;
        let violated = desired.iter().any(|(g, p)| {
            // guard against 0.3·10 = 2.9999…
            let floor = (rank as f64 * p + 1e-9).floor();
            state.group_count(topic, g) + 1e-9 < floor
        });
        if violated {
            violated_positions.insert(rank);
        }
    }
    let feasible_up_to = violated_positions
        .iter()
        .next()
        .map(|first| first - 1)
        .unwrap_or(docs.len());
    Ok(Feasibility {
        violated_positions,
        feasible_up_to,
    })
}
