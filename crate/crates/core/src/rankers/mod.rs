//! Re-rankers: FAIR ε-greedy, the greedy ideal α-nDCG ranker, and the
//! default-ranking pass-through, plus proxy judgments for running without
//! gold relevance labels.

mod epsilon;
mod proxy;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::greedy_ideal;
use crate::model::{Ranking, Topic};

pub use epsilon::{epsilon_greedy, epsilon_greedy_with, Branch, RerankOutcome};
pub use proxy::{build_proxy_judgments, proxy_topic, ProxyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RelevanceMode {
    Judged,
    Proxy(ProxyKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerConfig {
    pub epsilon: f64,
    pub k: usize,
    pub seed: u64,
    pub runs: usize,
    pub relevance_mode: RelevanceMode,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            k: 10,
            seed: 0,
            runs: 1,
            relevance_mode: RelevanceMode::Judged,
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!("epsilon {} outside [0,1]", self.epsilon)));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether repeated runs can differ at all.
    pub fn is_randomized(&self) -> bool {
        self.epsilon > 0.0 && self.epsilon < 1.0
    }

    /// Number of repetitions actually needed.
    pub fn effective_runs(&self) -> usize {
        if self.is_randomized() {
            self.runs
        } else {
            1
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Independent PRNG stream for one `(seed, run, topic)` triple.
pub fn stream_rng(seed: u64, run: usize, topic: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(fnv1a(topic.as_bytes()) ^ splitmix64(run as u64)));
    rng
}

/// Greedy approximation of the ideal α-nDCG ranking.
pub fn greedy_ideal_ranker(topic: &Topic, k: usize, alpha: f64) -> Ranking {
    let ideal = greedy_ideal(topic, k, alpha);
    to_ranking(topic, &ideal.docs)
}

/// First `k` documents of the default ranking; the flag reports truncation.
pub fn passthrough(topic: &Topic, k: usize) -> Result<(Ranking, bool)> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let default = topic.default_ranking();
    if default.is_empty() {
        return Err(Error::EmptyDefaultRanking(topic.id().to_string()));
    }
    let truncated = default.len() < k;
    let items = default.iter().take(k).cloned();
    Ok((Ranking::new(items)?, truncated))
}

pub(crate) fn to_ranking(topic: &Topic, docs: &[usize]) -> Ranking {
    Ranking::new(docs.iter().map(|&d| topic.document(d).doc_id.clone()))
        .expect("candidate indices are distinct")
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::model::{AspectId, DocId, Document, Judgments};

    fn topic() -> Topic {
        let docs = vec![
            Document::new("d1").with_groups(["A"]),
            Document::new("d2").with_groups(["A"]),
            Document::new("d3").with_groups(["B"]),
        ];
        let default: Vec<DocId> = ["d3", "d1", "d2"].map(DocId::from).to_vec();
        Topic::new("t", [AspectId::from("a")], docs, Judgments::default(), default).unwrap()
    }

    #[test]
    fn passthrough_takes_prefix() {
        let (r, truncated) = passthrough(&topic(), 2).unwrap();
        assert_eq!(r.items(), &["d3".into(), "d1".into()]);
        assert!(!truncated);
        let (r, truncated) = passthrough(&topic(), 5).unwrap();
        assert_eq!(r.len(), 3);
        assert!(truncated);
        assert!(passthrough(&topic(), 0).is_err());
    }

    #[test]
    fn passthrough_requires_default_ranking() {
        let t = Topic::new(
            "t",
            [AspectId::from("a")],
            vec![Document::new("d1")],
            Judgments::default(),
            vec![],
        )
        .unwrap();
        assert!(matches!(passthrough(&t, 1), Err(Error::EmptyDefaultRanking(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = RankerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.epsilon = 1.5;
        assert!(cfg.validate().is_err());
        cfg.epsilon = 0.5;
        cfg.runs = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, 0, "101").random();
        let b: u64 = stream_rng(7, 0, "101").random();
        let c: u64 = stream_rng(7, 1, "101").random();
        let d: u64 = stream_rng(7, 0, "102").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
