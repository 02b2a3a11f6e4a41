use std::collections::BTreeMap;

use super::{AspectId, GroupDistribution, GroupId, Topic};
use crate::error::{Error, Result};

/// Running state of a ranking prefix: judged coverage per aspect and
/// fractional group mass, indexed by the owning topic's universes.
///
/// A document in `m` groups adds `1/m` to each, so the group counts always
/// sum to `depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixState {
    aspect_counts: Vec<f64>,
    group_counts: Vec<f64>,
    depth: usize,
}

impl PrefixState {
    pub fn new(topic: &Topic) -> Self {
        Self {
            aspect_counts: vec![0.0; topic.aspects().len()],
            group_counts: vec![0.0; topic.groups().len()],
            depth: 0,
        }
    }

    /// Replays a sequence of candidate indices from the empty state.
    pub fn from_prefix(topic: &Topic, docs: &[usize]) -> Self {
        let mut state = Self::new(topic);
        for &d in docs {
            state.push(topic, d);
        }
        state
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Cumulative coverage `r_a` per aspect, aligned with `topic.aspects()`.
    pub fn aspect_counts(&self) -> &[f64] {
        &self.aspect_counts
    }

    /// Fractional group mass, aligned with `topic.groups()`.
    pub fn group_counts(&self) -> &[f64] {
        &self.group_counts
    }

    pub fn aspect_count(&self, topic: &Topic, aspect: &AspectId) -> f64 {
        topic
            .aspect_index(aspect)
            .map(|i| self.aspect_counts[i])
            .unwrap_or(0.0)
    }

    pub fn group_count(&self, topic: &Topic, group: &GroupId) -> f64 {
        topic
            .group_index(group)
            .map(|i| self.group_counts[i])
            .unwrap_or(0.0)
    }

    /// Adds candidate `doc` in place. The document must not already be part
    /// of the prefix.
    pub fn push(&mut self, topic: &Topic, doc: usize) {
        let profile = topic.profile(doc);
        for &(a, g) in &profile.aspect_grades {
            self.aspect_counts[a] += g;
        }
        for &(g, share) in &profile.group_shares {
            self.group_counts[g] += share;
        }
        self.depth += 1;
    }

    /// Returns the state with `doc` appended, leaving `self` untouched.
    pub fn appended(&self, topic: &Topic, doc: usize) -> Self {
        let mut next = self.clone();
        next.push(topic, doc);
        next
    }

    /// Group proportions of the prefix, aligned with `topic.groups()`.
    pub fn dense_distribution(&self) -> Result<Vec<f64>> {
        if self.depth == 0 {
            return Err(Error::EmptyPrefix);
        }
        let n = self.depth as f64;
        Ok(self.group_counts.iter().map(|c| c / n).collect())
    }

    /// Group proportions over the topic's full group universe; groups absent
    /// from the prefix carry mass 0.
    pub fn distribution(&self, topic: &Topic) -> Result<GroupDistribution> {
        let dense = self.dense_distribution()?;
        let map: BTreeMap<GroupId, f64> = topic.groups().iter().cloned().zip(dense).collect();
        Ok(GroupDistribution::from_map_unchecked(map))
    }

    /// Group proportions if `doc` were appended, written into `out`.
    pub(crate) fn distribution_with(&self, topic: &Topic, doc: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.group_counts);
        for &(g, share) in &topic.profile(doc).group_shares {
            out[g] += share;
        }
        let n = (self.depth + 1) as f64;
        for p in out.iter_mut() {
            *p /= n;
        }
    }
}
