//! Domain types: documents, judgments, topics, rankings and group distributions.
//!
//! A [`Topic`] is validated once at construction and carries a dense index
//! (aspect and group universes, per-document shares) that every metric and
//! ranker works against. Group and aspect ids are interned into the topic's
//! sorted universes so the hot loops operate on plain slices.

mod desired;
mod prefix;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use desired::{build_desired_distribution, FairnessNotion};
pub use prefix::PrefixState;

/// Reserved group for documents without any group label.
pub const UNGROUPED: &str = "__other__";

/// Tolerance on the total mass of a [`GroupDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-9;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Document identifier, unique within a topic.
    DocId
);
string_id!(
    /// Aspect (subtopic) identifier.
    AspectId
);
string_id!(
    /// Fairness group identifier.
    GroupId
);
string_id!(TopicId);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: DocId,
    #[serde(default)]
    pub groups: BTreeSet<GroupId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_rank: Option<usize>,
}

impl Document {
    pub fn new(doc_id: impl Into<DocId>) -> Self {
        Self {
            doc_id: doc_id.into(),
            groups: BTreeSet::new(),
            default_rank: None,
        }
    }

    pub fn with_groups<I, G>(mut self, groups: I) -> Self
    where
        I: IntoIterator<Item = G>,
        G: Into<GroupId>,
    {
        self.groups.extend(groups.into_iter().map(Into::into));
        self
    }

    pub fn with_default_rank(mut self, rank: usize) -> Self {
        self.default_rank = Some(rank);
        self
    }
}

/// Relevance table `(doc, aspect) -> grade`. Absent entries read as 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Judgments {
    table: BTreeMap<DocId, BTreeMap<AspectId, f64>>,
    #[serde(default)]
    binary: bool,
}

impl Judgments {
    pub fn new(binary: bool) -> Self {
        Self {
            table: BTreeMap::new(),
            binary,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    /// Records a grade, replacing any previous grade for the pair.
    pub fn set(&mut self, doc: impl Into<DocId>, aspect: impl Into<AspectId>, grade: f64) -> Result<()> {
        let doc = doc.into();
        let aspect = aspect.into();
        if !grade.is_finite() || grade < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "grade {grade} for ({doc}, {aspect}) must be a finite real >= 0"
            )));
        }
        if self.binary && grade != 0.0 && grade != 1.0 {
            return Err(Error::InvalidConfig(format!(
                "binary judgments only admit 0 or 1, got {grade} for ({doc}, {aspect})"
            )));
        }
        self.table.entry(doc).or_default().insert(aspect, grade);
        Ok(())
    }

    pub fn grade(&self, doc: &DocId, aspect: &AspectId) -> f64 {
        self.table
            .get(doc)
            .and_then(|row| row.get(aspect))
            .copied()
            .unwrap_or(0.0)
    }

    /// Grades recorded for one document.
    pub fn grades_of(&self, doc: &DocId) -> impl Iterator<Item = (&AspectId, f64)> {
        self.table
            .get(doc)
            .into_iter()
            .flat_map(|row| row.iter().map(|(a, g)| (a, *g)))
    }

    /// Topic-level relevance: the maximum grade over aspects.
    pub fn relevance(&self, doc: &DocId) -> f64 {
        self.grades_of(doc).map(|(_, g)| g).fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DocId, &AspectId, f64)> {
        self.table
            .iter()
            .flat_map(|(d, row)| row.iter().map(move |(a, g)| (d, a, *g)))
    }

    pub fn aspects(&self) -> BTreeSet<AspectId> {
        self.table.values().flat_map(|row| row.keys().cloned()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// An ordered list of distinct document ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    items: Vec<DocId>,
}

impl Ranking {
    pub fn new<I, D>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: Into<DocId>,
    {
        let items: Vec<DocId> = items.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for d in &items {
            if !seen.insert(d) {
                return Err(Error::InvalidRanking(format!("duplicate document `{d}`")));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[DocId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Probability mass over groups. Doubles as the observed prefix distribution
/// and the desired (target) distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupDistribution {
    mass: BTreeMap<GroupId, f64>,
}

impl GroupDistribution {
    /// Validates non-negativity and a total of 1 within [`MASS_TOLERANCE`].
    pub fn new<I, G>(mass: I) -> Result<Self>
    where
        I: IntoIterator<Item = (G, f64)>,
        G: Into<GroupId>,
    {
        Self::with_tolerance(mass, MASS_TOLERANCE)
    }

    /// Like [`GroupDistribution::new`] with a caller-chosen tolerance on the
    /// total; the accepted masses are renormalized to sum to 1.
    pub fn with_tolerance<I, G>(mass: I, tolerance: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (G, f64)>,
        G: Into<GroupId>,
    {
        let mut map = BTreeMap::new();
        for (g, p) in mass {
            let g = g.into();
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!("mass {p} for group `{g}`")));
            }
            if map.insert(g.clone(), p).is_some() {
                return Err(Error::InvalidDistribution(format!("group `{g}` listed twice")));
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > tolerance {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1 within {tolerance}"
            )));
        }
        for p in map.values_mut() {
            *p /= total;
        }
        Ok(Self { mass: map })
    }

    /// Uniform mass over the given groups.
    pub fn uniform<I, G>(groups: I) -> Result<Self>
    where
        I: IntoIterator<Item = G>,
        G: Into<GroupId>,
    {
        let groups: BTreeSet<GroupId> = groups.into_iter().map(Into::into).collect();
        if groups.is_empty() {
            return Err(Error::InvalidDistribution("no groups".into()));
        }
        let p = 1.0 / groups.len() as f64;
        Ok(Self {
            mass: groups.into_iter().map(|g| (g, p)).collect(),
        })
    }

    /// Builds from raw non-negative weights by normalizing them.
    pub fn from_weights<I, G>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (G, f64)>,
        G: Into<GroupId>,
    {
        let weights: Vec<(GroupId, f64)> = weights.into_iter().map(|(g, w)| (g.into(), w)).collect();
        let total: f64 = weights.iter().map(|(_, w)| *w).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|(g, w)| (g, w / total)))
    }

    pub(crate) fn from_map_unchecked(mass: BTreeMap<GroupId, f64>) -> Self {
        Self { mass }
    }

    pub fn get(&self, group: &GroupId) -> f64 {
        self.mass.get(group).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupId, f64)> {
        self.mass.iter().map(|(g, p)| (g, *p))
    }

    pub fn groups(&self) -> impl Iterator<Item = &GroupId> {
        self.mass.keys()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }
}

/// Which normalizer the nDRKL aggregate divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NdrklNormalizer {
    /// `Σ 1/log2(i+1)`: range (0, 1] with optimum 1.
    #[default]
    Unit,
    /// `Σ 1/(i·log2(i+1))`, kept for compatibility with the printed formula.
    Printed,
}

/// How the ideal DCG is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IdcgMode {
    #[default]
    Greedy,
    /// Exhaustive search, allowed for pools up to `max_pool` documents.
    Exact { max_pool: usize },
}

pub const DEFAULT_EXACT_POOL_BOUND: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub alpha: f64,
    pub persistence: f64,
    pub cutoffs: Vec<usize>,
    pub kl_smoothing_eta: f64,
    pub binary_relevance: bool,
    pub idcg: IdcgMode,
    pub ndrkl_normalizer: NdrklNormalizer,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            persistence: 0.8,
            cutoffs: vec![10, 20, 50],
            kl_smoothing_eta: 0.0,
            binary_relevance: false,
            idcg: IdcgMode::Greedy,
            ndrkl_normalizer: NdrklNormalizer::Unit,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha {} outside (0,1)", self.alpha)));
        }
        if !(self.persistence > 0.0 && self.persistence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "persistence {} outside (0,1)",
                self.persistence
            )));
        }
        if !(0.0..1.0).contains(&self.kl_smoothing_eta) {
            return Err(Error::InvalidConfig(format!(
                "smoothing eta {} outside [0,1)",
                self.kl_smoothing_eta
            )));
        }
        if self.cutoffs.contains(&0) {
            return Err(Error::InvalidConfig("cutoffs must be positive".into()));
        }
        Ok(())
    }
}

/// Dense per-document view used by metrics and rankers.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DocProfile {
    /// `(aspect index, grade)` for every positive grade.
    pub aspect_grades: Vec<(usize, f64)>,
    /// `(group index, share)`; shares sum to 1.
    pub group_shares: Vec<(usize, f64)>,
    /// Maximum aspect grade.
    pub relevance: f64,
}

/// A query with its aspects, candidate pool, judgments and default ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    id: TopicId,
    aspects: Vec<AspectId>,
    candidates: Vec<Document>,
    judgments: Judgments,
    default_ranking: Vec<DocId>,
    groups: Vec<GroupId>,
    index: HashMap<DocId, usize>,
    profiles: Vec<DocProfile>,
    tie_order: Vec<usize>,
}

impl Topic {
    /// Validates the topic and builds its dense index.
    ///
    /// A non-empty `default_ranking` assigns `default_rank` to every listed
    /// document; a document that already carries a different rank is an
    /// error.
    pub fn new(
        id: impl Into<TopicId>,
        aspects: impl IntoIterator<Item = AspectId>,
        candidates: Vec<Document>,
        judgments: Judgments,
        default_ranking: Vec<DocId>,
    ) -> Result<Self> {
        let id = id.into();
        let aspects: Vec<AspectId> = aspects.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if aspects.is_empty() {
            return Err(Error::topic(id.as_str(), "at least one aspect is required"));
        }
        let aspect_pos: HashMap<&AspectId, usize> = aspects.iter().enumerate().map(|(i, a)| (a, i)).collect();

        let mut candidates = candidates;
        let mut index = HashMap::with_capacity(candidates.len());
        for (i, d) in candidates.iter().enumerate() {
            if index.insert(d.doc_id.clone(), i).is_some() {
                return Err(Error::topic(id.as_str(), format!("duplicate document `{}`", d.doc_id)));
            }
        }

        let mut listed = BTreeSet::new();
        for (pos, doc) in default_ranking.iter().enumerate() {
            let Some(&i) = index.get(doc) else {
                return Err(Error::topic(
                    id.as_str(),
                    format!("default ranking lists unknown document `{doc}`"),
                ));
            };
            if !listed.insert(doc) {
                return Err(Error::topic(
                    id.as_str(),
                    format!("default ranking lists `{doc}` twice"),
                ));
            }
            let rank = pos + 1;
            match candidates[i].default_rank {
                Some(r) if r != rank => {
                    return Err(Error::topic(
                        id.as_str(),
                        format!("`{doc}` has default rank {r} but is listed at {rank}"),
                    ))
                }
                _ => candidates[i].default_rank = Some(rank),
            }
        }
        let mut ranks = BTreeSet::new();
        for d in &candidates {
            if let Some(r) = d.default_rank {
                if r == 0 || !ranks.insert(r) {
                    return Err(Error::topic(
                        id.as_str(),
                        format!("invalid or repeated default rank {r} on `{}`", d.doc_id),
                    ));
                }
            }
        }

        for (doc, aspect, _) in judgments.iter() {
            if !aspect_pos.contains_key(aspect) {
                return Err(Error::topic(
                    id.as_str(),
                    format!("judgment for `{doc}` references unknown aspect `{aspect}`"),
                ));
            }
        }

        let ungrouped = GroupId::from(UNGROUPED);
        let groups: Vec<GroupId> = candidates
            .iter()
            .flat_map(|d| {
                if d.groups.is_empty() {
                    vec![ungrouped.clone()]
                } else {
                    d.groups.iter().cloned().collect()
                }
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let group_pos: HashMap<&GroupId, usize> = groups.iter().enumerate().map(|(i, g)| (g, i)).collect();

        let profiles = candidates
            .iter()
            .map(|d| {
                let aspect_grades: Vec<(usize, f64)> = judgments
                    .grades_of(&d.doc_id)
                    .filter(|(_, g)| *g > 0.0)
                    .map(|(a, g)| (aspect_pos[a], g))
                    .collect();
                let group_shares = if d.groups.is_empty() {
                    vec![(group_pos[&ungrouped], 1.0)]
                } else {
                    let share = 1.0 / d.groups.len() as f64;
                    d.groups.iter().map(|g| (group_pos[g], share)).collect()
                };
                let relevance = aspect_grades.iter().map(|(_, g)| *g).fold(0.0, f64::max);
                DocProfile {
                    aspect_grades,
                    group_shares,
                    relevance,
                }
            })
            .collect();

        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| {
            let (da, db) = (&candidates[a], &candidates[b]);
            da.default_rank
                .unwrap_or(usize::MAX)
                .cmp(&db.default_rank.unwrap_or(usize::MAX))
                .then_with(|| da.doc_id.cmp(&db.doc_id))
        });
        let mut tie_order = vec![0; candidates.len()];
        for (pos, &i) in order.iter().enumerate() {
            tie_order[i] = pos;
        }

        Ok(Self {
            id,
            aspects,
            candidates,
            judgments,
            default_ranking,
            groups,
            index,
            profiles,
            tie_order,
        })
    }

    /// Same documents and default ranking under a different judgment table.
    pub fn with_judgments(&self, aspects: impl IntoIterator<Item = AspectId>, judgments: Judgments) -> Result<Self> {
        Topic::new(
            self.id.clone(),
            aspects,
            self.candidates.clone(),
            judgments,
            self.default_ranking.clone(),
        )
    }

    pub fn id(&self) -> &TopicId {
        &self.id
    }

    pub fn aspects(&self) -> &[AspectId] {
        &self.aspects
    }

    pub fn candidates(&self) -> &[Document] {
        &self.candidates
    }

    pub fn judgments(&self) -> &Judgments {
        &self.judgments
    }

    pub fn default_ranking(&self) -> &[DocId] {
        &self.default_ranking
    }

    /// Group universe: every group over all candidates, plus [`UNGROUPED`]
    /// when some candidate carries no group. Sorted.
    pub fn groups(&self) -> &[GroupId] {
        &self.groups
    }

    pub fn pool_size(&self) -> usize {
        self.candidates.len()
    }

    pub fn doc_index(&self, doc: &DocId) -> Option<usize> {
        self.index.get(doc).copied()
    }

    pub fn document(&self, idx: usize) -> &Document {
        &self.candidates[idx]
    }

    /// Topic-level relevance of a candidate (max aspect grade).
    pub fn relevance(&self, idx: usize) -> f64 {
        self.profiles[idx].relevance
    }

    pub(crate) fn profile(&self, idx: usize) -> &DocProfile {
        &self.profiles[idx]
    }

    /// Position in the (default rank, doc id) order; lower wins ties.
    pub(crate) fn tie_rank(&self, idx: usize) -> usize {
        self.tie_order[idx]
    }

    pub fn group_index(&self, group: &GroupId) -> Option<usize> {
        self.groups.binary_search(group).ok()
    }

    pub fn aspect_index(&self, aspect: &AspectId) -> Option<usize> {
        self.aspects.binary_search(aspect).ok()
    }

    /// Maps a ranking onto candidate indices.
    pub fn resolve(&self, ranking: &Ranking) -> Result<Vec<usize>> {
        ranking
            .items()
            .iter()
            .map(|d| {
                self.doc_index(d).ok_or_else(|| {
                    Error::InvalidRanking(format!("`{d}` is not a candidate of topic `{}`", self.id))
                })
            })
            .collect()
    }

    /// Aligns a desired distribution with this topic's group universe.
    ///
    /// With `eta > 0` the target becomes `(1-eta)·desired + eta·uniform`,
    /// where the uniform part spans the union of the topic's groups and the
    /// desired distribution's groups.
    pub fn target(&self, desired: &GroupDistribution, eta: f64) -> Result<Target> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::InvalidConfig(format!("smoothing eta {eta} outside [0,1)")));
        }
        let extra = desired.groups().filter(|g| self.group_index(g).is_none()).count();
        let universe = (self.groups.len() + extra) as f64;
        let probs = self
            .groups
            .iter()
            .map(|g| (1.0 - eta) * desired.get(g) + eta / universe)
            .collect();
        Ok(Target {
            groups: self.groups.clone(),
            probs,
        })
    }
}

/// A desired distribution aligned with a topic's group universe (and
/// smoothed, when requested).
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    groups: Vec<GroupId>,
    probs: Vec<f64>,
}

impl Target {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn groups(&self) -> &[GroupId] {
        &self.groups
    }

    pub fn prob(&self, group: &GroupId) -> f64 {
        self.groups
            .binary_search(group)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }
}
