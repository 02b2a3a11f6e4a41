//! Seeded synthetic datasets with a controllable link between group
//! membership and relevance.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bundle::{DatasetBundle, Provenance};
use crate::error::{Error, Result};
use crate::model::{AspectId, DocId, Document, Judgments, Topic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub topics: usize,
    /// Candidates per topic.
    pub pool: usize,
    /// Group prior; its length is the number of groups.
    pub prior: Vec<f64>,
    /// Extra relevance probability for majority-group documents, in [0,1].
    pub relevance_bias: f64,
    /// Relevance probability shared by every document.
    pub base_relevance: f64,
    pub aspects_per_group: usize,
    /// Width of the uniform noise added to relevance when forming the
    /// default ranking.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            topics: 100,
            pool: 100,
            prior: vec![0.8, 0.2],
            relevance_bias: 0.6,
            base_relevance: 0.1,
            aspects_per_group: 2,
            jitter: 0.5,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.prior.iter().sum();
        if self.prior.is_empty() || self.prior.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidDistribution(format!(
                "group prior {:?} must be non-negative and sum to 1",
                self.prior
            )));
        }
        if !(0.0..=1.0).contains(&self.relevance_bias) {
            return Err(Error::InvalidConfig(format!(
                "relevance bias {} outside [0,1]",
                self.relevance_bias
            )));
        }
        if !(0.0..=1.0).contains(&self.base_relevance) {
            return Err(Error::InvalidConfig(format!(
                "base relevance {} outside [0,1]",
                self.base_relevance
            )));
        }
        if self.topics == 0 || self.pool == 0 || self.aspects_per_group == 0 {
            return Err(Error::InvalidConfig("topics, pool and aspects per group must be positive".into()));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::InvalidConfig(format!("jitter {} must be >= 0", self.jitter)));
        }
        Ok(())
    }

    /// Index of the group with the largest prior (first on ties).
    pub fn majority_group(&self) -> usize {
        self.prior
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }
}

pub fn group_name(g: usize) -> String {
    format!("G{g}")
}

/// Generates a dataset: each document draws one group from the prior, one
/// aspect of that group, and binary relevance with probability
/// `base + bias·[majority group]`. The default ranking sorts by relevance
/// plus uniform jitter. A pure function of the spec.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<DatasetBundle> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let groups = WeightedIndex::new(&spec.prior)
        .map_err(|e| Error::InvalidDistribution(format!("group prior: {e}")))?;
    let majority = spec.majority_group();
    let width = spec.topics.to_string().len();
    let doc_width = spec.pool.to_string().len();

    let aspects: Vec<AspectId> = (0..spec.prior.len())
        .flat_map(|g| (0..spec.aspects_per_group).map(move |a| AspectId::from(format!("{}.a{a}", group_name(g)))))
        .collect();

    let mut topics = Vec::with_capacity(spec.topics);
    for t in 0..spec.topics {
        let topic_id = format!("T{:0width$}", t + 1);
        let mut judgments = Judgments::new(true);
        let mut documents = Vec::with_capacity(spec.pool);
        let mut keys = Vec::with_capacity(spec.pool);
        for d in 0..spec.pool {
            let doc_id = format!("{topic_id}-d{:0doc_width$}", d + 1);
            let g = groups.sample(&mut rng);
            let a = rng.random_range(0..spec.aspects_per_group);
            let p = (spec.base_relevance + if g == majority { spec.relevance_bias } else { 0.0 }).min(1.0);
            let relevant = rng.random::<f64>() < p;
            let noise = rng.random::<f64>() * spec.jitter;
            judgments.set(doc_id.as_str(), format!("{}.a{a}", group_name(g)), if relevant { 1.0 } else { 0.0 })?;
            keys.push((if relevant { 1.0 } else { 0.0 } + noise, d));
            documents.push(Document::new(doc_id.as_str()).with_groups([group_name(g)]));
        }
        keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let default_ranking: Vec<DocId> = keys.iter().map(|&(_, d)| documents[d].doc_id.clone()).collect();
        topics.push(Topic::new(topic_id, aspects.clone(), documents, judgments, default_ranking)?);
    }

    let provenance = Provenance {
        sources: vec![format!("synthetic:{}", serde_json::to_string(spec).expect("spec serializes"))],
        format: "synthetic".into(),
        warnings: Vec::new(),
    };
    DatasetBundle::new(topics, provenance)
}
