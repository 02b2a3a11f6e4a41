//! The portable dataset format and assembly of topics from TREC inputs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::trec::{Qrels, Run};
use crate::error::{Error, Result};
use crate::model::{AspectId, DocId, Document, GroupId, Judgments, Topic, TopicId};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sources: Vec<String>,
    pub format: String,
    pub warnings: Vec<String>,
}

/// A set of topics plus where they came from. Immutable once loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub topics: Vec<Topic>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct TopicRecord {
    id: TopicId,
    aspects: Vec<AspectId>,
    documents: Vec<Document>,
    binary: bool,
    judgments: Vec<(DocId, AspectId, f64)>,
    default_ranking: Vec<DocId>,
}

#[derive(Serialize, Deserialize)]
struct BundleRecord {
    provenance: Provenance,
    topics: Vec<TopicRecord>,
}

impl DatasetBundle {
    pub fn new(topics: Vec<Topic>, provenance: Provenance) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for t in &topics {
            if !ids.insert(t.id()) {
                return Err(Error::topic(t.id().as_str(), "topic listed twice"));
            }
        }
        Ok(Self { topics, provenance })
    }

    pub fn topic(&self, id: &TopicId) -> Option<&Topic> {
        self.topics.iter().find(|t| t.id() == id)
    }

    /// Serializes to the JSON interchange format.
    pub fn to_json(&self) -> String {
        let record = BundleRecord {
            provenance: self.provenance.clone(),
            topics: self
                .topics
                .iter()
                .map(|t| TopicRecord {
                    id: t.id().clone(),
                    aspects: t.aspects().to_vec(),
                    documents: t.candidates().to_vec(),
                    binary: t.judgments().is_binary(),
                    judgments: t
                        .judgments()
                        .iter()
                        .map(|(d, a, g)| (d.clone(), a.clone(), g))
                        .collect(),
                    default_ranking: t.default_ranking().to_vec(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&record).expect("bundle serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: BundleRecord = serde_json::from_str(text)?;
        let topics = record
            .topics
            .into_iter()
            .map(|r| {
                let mut judgments = Judgments::new(r.binary);
                for (d, a, g) in r.judgments {
                    judgments.set(d, a, g)?;
                }
                Topic::new(r.id, r.aspects, r.documents, judgments, r.default_ranking)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(topics, record.provenance)
    }
}

/// Builds topics from parsed TREC inputs.
///
/// Candidates are the run's documents followed by judged documents the run
/// did not retrieve. Without a groups table, a document's groups are the
/// subtopics it is judged relevant to. Topics present only in the run get
/// their group ids as aspects and no judgments.
pub fn assemble(
    qrels: Option<&Qrels>,
    run: Option<&Run>,
    groups: Option<&BTreeMap<DocId, BTreeSet<GroupId>>>,
    binary: bool,
    provenance: Provenance,
) -> Result<DatasetBundle> {
    let mut provenance = provenance;
    if let Some(q) = qrels {
        provenance.warnings.extend(q.warnings.iter().cloned());
    }
    if let Some(r) = run {
        provenance.warnings.extend(r.warnings.iter().cloned());
    }

    let mut topic_ids: BTreeSet<&TopicId> = BTreeSet::new();
    if let Some(q) = qrels {
        topic_ids.extend(q.topics.keys());
    }
    if let Some(r) = run {
        topic_ids.extend(r.topics.keys());
    }

    let mut used_group_docs: BTreeSet<DocId> = BTreeSet::new();
    let mut topics = Vec::with_capacity(topic_ids.len());
    for id in topic_ids {
        let judged = qrels.and_then(|q| q.topics.get(id));
        let ranked = run.map(|r| r.ranking(id)).unwrap_or_default();

        let mut order: Vec<DocId> = ranked.clone();
        let mut listed: BTreeSet<DocId> = ranked.iter().cloned().collect();
        if let Some(j) = judged {
            for doc in j.grades.keys() {
                if listed.insert(doc.clone()) {
                    order.push(doc.clone());
                }
            }
        }

        let mut judgments = Judgments::new(binary);
        if let Some(j) = judged {
            for (doc, row) in &j.grades {
                for (aspect, &grade) in row {
                    judgments.set(doc.clone(), aspect.clone(), grade)?;
                }
            }
        }

        let documents: Vec<Document> = order
            .iter()
            .map(|doc| {
                let doc_groups: BTreeSet<GroupId> = match groups {
                    Some(table) => {
                        let found = table.get(doc);
                        if found.is_some() {
                            used_group_docs.insert(doc.clone());
                        }
                        found.cloned().unwrap_or_default()
                    }
                    None => judgments
                        .grades_of(doc)
                        .filter(|(_, g)| *g > 0.0)
                        .map(|(a, _)| GroupId::from(a.as_str()))
                        .collect(),
                };
                Document {
                    doc_id: doc.clone(),
                    groups: doc_groups,
                    default_rank: None,
                }
            })
            .collect();

        let aspects: Vec<AspectId> = match judged {
            Some(j) if !j.aspects.is_empty() => j.aspects.iter().cloned().collect(),
            _ => {
                let mut from_groups: BTreeSet<AspectId> = documents
                    .iter()
                    .flat_map(|d| d.groups.iter().map(|g| AspectId::from(g.as_str())))
                    .collect();
                if documents.iter().any(|d| d.groups.is_empty()) {
                    from_groups.insert(AspectId::from(crate::model::UNGROUPED));
                }
                from_groups.into_iter().collect()
            }
        };

        topics.push(Topic::new(id.clone(), aspects, documents, judgments, ranked)?);
    }

    if let Some(table) = groups {
        let orphans = table.keys().filter(|d| !used_group_docs.contains(*d)).count();
        if orphans > 0 {
            provenance.warnings.push(format!(
                "{orphans} document(s) in the groups table are not candidates of any topic"
            ));
        }
    }
    DatasetBundle::new(topics, provenance)
}
