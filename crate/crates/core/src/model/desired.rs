//! Desired (target) group distributions for the supported fairness notions.

use std::collections::BTreeMap;

use super::{GroupDistribution, GroupId, Topic, UNGROUPED};
use crate::error::{Error, Result};

/// Tolerance on the total of an explicitly supplied distribution.
pub const EXPLICIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum FairnessNotion {
    /// Equal exposure for every group of the topic (parity).
    Uniform,
    /// Group shares over the whole candidate pool (demographic parity).
    Collection,
    /// Mass proportional to each group's mean relevance (disparate treatment).
    RelevanceProportional,
    /// A caller-provided distribution, validated against the topic.
    Explicit(GroupDistribution),
}

pub fn build_desired_distribution(topic: &Topic, notion: &FairnessNotion) -> Result<GroupDistribution> {
    if topic.groups().is_empty() {
        return Err(Error::topic(topic.id().as_str(), "no groups among candidates"));
    }
    match notion {
        FairnessNotion::Uniform => GroupDistribution::uniform(topic.groups().iter().cloned()),
        FairnessNotion::Collection => {
            let mut mass = vec![0.0; topic.groups().len()];
            for d in 0..topic.pool_size() {
                for &(g, share) in &topic.profile(d).group_shares {
                    mass[g] += share;
                }
            }
            GroupDistribution::from_weights(topic.groups().iter().cloned().zip(mass))
        }
        FairnessNotion::RelevanceProportional => {
            let n = topic.groups().len();
            let (mut weighted, mut members) = (vec![0.0; n], vec![0.0; n]);
            for d in 0..topic.pool_size() {
                let profile = topic.profile(d);
                for &(g, share) in &profile.group_shares {
                    weighted[g] += share * profile.relevance;
                    members[g] += share;
                }
            }
            let means: Vec<f64> = weighted
                .iter()
                .zip(&members)
                .map(|(w, m)| if *m > 0.0 { w / m } else { 0.0 })
                .collect();
            if means.iter().all(|m| *m == 0.0) {
                return Err(Error::ZeroRelevance);
            }
            GroupDistribution::from_weights(topic.groups().iter().cloned().zip(means))
        }
        FairnessNotion::Explicit(dist) => {
            let total = dist.total();
            if (total - 1.0).abs() > EXPLICIT_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "explicit distribution sums to {total}"
                )));
            }
            let other = GroupId::from(UNGROUPED);
            if topic.group_index(&other).is_some() && !dist.groups().any(|g| *g == other) {
                return Err(Error::InvalidDistribution(format!(
                    "topic `{}` has ungrouped documents but the explicit distribution lacks `{UNGROUPED}`",
                    topic.id()
                )));
            }
            let map: BTreeMap<GroupId, f64> = dist.iter().map(|(g, p)| (g.clone(), p)).collect();
            Ok(GroupDistribution::from_map_unchecked(map))
        }
    }
}
