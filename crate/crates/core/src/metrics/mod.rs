//! Utility, fairness and FAIR metrics.
//!
//! All metrics are pure functions of a topic, a ranking, and (for the
//! fairness-aware ones) a desired group distribution. Per-rank KL terms use
//! the distribution of the top-`i` prefix *after* the `i`-th document is
//! placed, with the natural logarithm.

mod fairness;
mod ideal;
mod utility;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GroupDistribution, GroupId, PrefixState, Target, Topic};

pub use fairness::{feasibility, kl_at, ndkl, ndrkl, skew, Feasibility, Skew};
pub use ideal::{exact_ideal, greedy_ideal, ideal_dcg, IdealRanking};
pub use utility::{alpha_ndcg, fair_alpha_ndcg, fair_ratio, fair_rbp, ndcg, rank_profile, rbp, rbp_relevance};

/// Equality window for score comparisons in argmax/argmin selections.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Conditions attached to a reported score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// The normalizer was zero (no relevant documents); the value is 0.
    pub degenerate: bool,
    /// The ranking (or pool) was shorter than the requested cutoff.
    pub truncated: bool,
    /// The normalized value exceeds 1 because the greedy ideal was beaten.
    pub above_one: bool,
}

impl Flags {
    pub fn merge(self, other: Flags) -> Flags {
        Flags {
            degenerate: self.degenerate || other.degenerate,
            truncated: self.truncated || other.truncated,
            above_one: self.above_one || other.above_one,
        }
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.degenerate {
            out.push("degenerate");
        }
        if self.truncated {
            out.push("truncated");
        }
        if self.above_one {
            out.push("above-one");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub value: f64,
    pub flags: Flags,
}

impl Score {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            flags: Flags::default(),
        }
    }

    pub(crate) fn degenerate(truncated: bool) -> Self {
        Self {
            value: 0.0,
            flags: Flags {
                degenerate: true,
                truncated,
                above_one: false,
            },
        }
    }
}

/// Position discount `log2(i+1)` for a 1-based rank.
pub fn discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

/// `d_KL(d1 || d2) = Σ d1(j)·ln(d1(j)/d2(j))` over the union of both
/// supports. With `eta > 0`, `d2` is first mixed with the uniform
/// distribution over that union.
pub fn kl_divergence(d1: &GroupDistribution, d2: &GroupDistribution, eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidConfig(format!("smoothing eta {eta} outside [0,1)")));
    }
    let universe: BTreeSet<&GroupId> = d1.groups().chain(d2.groups()).collect();
    let n = universe.len() as f64;
    let mut total = 0.0;
    for g in universe {
        let p = d1.get(g);
        if p == 0.0 {
            continue;
        }
        let q = (1.0 - eta) * d2.get(g) + eta / n;
        if q == 0.0 {
            return Err(Error::InfiniteDivergence(g.to_string()));
        }
        total += p * (p / q).ln();
    }
    Ok(total.max(0.0))
}

/// KL divergence of an observed dense distribution from an aligned target.
pub(crate) fn kl_dense(observed: &[f64], target: &Target) -> Result<f64> {
    let mut total = 0.0;
    for (j, (&p, &q)) in observed.iter().zip(target.probs()).enumerate() {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Err(Error::InfiniteDivergence(target.groups()[j].to_string()));
        }
        total += p * (p / q).ln();
    }
    Ok(total.max(0.0))
}

/// Novelty-decayed gain of appending candidate `doc` to `state`:
/// `Σ_a J(doc, a)·(1-alpha)^{r_a}`.
pub fn gain(topic: &Topic, state: &PrefixState, doc: usize, alpha: f64) -> f64 {
    let decay = 1.0 - alpha;
    let counts = state.aspect_counts();
    topic
        .profile(doc)
        .aspect_grades
        .iter()
        .map(|&(a, g)| g * decay.powf(counts[a]))
        .sum()
}

/// `Σ_{i=1..k} gains[i]/log2(i+1)`; `k` is clamped to the list length.
pub fn dcg(gains: &[f64], k: usize) -> f64 {
    gains
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, g)| g / discount(i + 1))
        .sum()
}

/// Per-rank gains of a sequence of candidate indices.
pub(crate) fn gains_of(topic: &Topic, docs: &[usize], alpha: f64) -> Vec<f64> {
    let mut state = PrefixState::new(topic);
    docs.iter()
        .map(|&d| {
            let g = gain(topic, &state, d, alpha);
            state.push(topic, d);
            g
        })
        .collect()
}

/// Per-rank `d_KL(D_{r^i} || target)` of a sequence of candidate indices.
pub(crate) fn prefix_kls(topic: &Topic, docs: &[usize], target: &Target) -> Result<Vec<f64>> {
    let mut state = PrefixState::new(topic);
    docs.iter()
        .map(|&d| {
            state.push(topic, d);
            kl_dense(&state.dense_distribution()?, target)
        })
        .collect()
}

/// Per-rank evaluation record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankRecord {
    pub gain: f64,
    pub kl: f64,
    /// `gain / (kl + 1)`, before position discounting.
    pub fair_term: f64,
    pub discount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub dcg: f64,
    /// Ideal DCG at the cutoff (the FAIR normalizer).
    pub idcg: f64,
    /// RBP of the ideal ordering (the RBP-based FAIR normalizer).
    pub rbp_ideal: f64,
    /// nDRKL normalizer.
    pub z: f64,
}

/// Rank-by-rank trace of a ranking's evaluation at a cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankProfile {
    pub per_rank: Vec<RankRecord>,
    pub cumulative: Normalizers,
    pub flags: Flags,
}
