//! Parsers for TREC-style whitespace-separated inputs.
//!
//! Fields split on any run of spaces or tabs; blank lines and lines starting
//! with `#` are skipped. Every rejection carries its 1-based line number.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{AspectId, DocId, GroupDistribution, GroupId, TopicId};

/// Non-blank, non-comment lines with their 1-based numbers.
fn lines<'a>(path: &'a str, bytes: &'a [u8]) -> impl Iterator<Item = Result<(usize, Vec<&'a str>)>> + 'a {
    bytes.split(|&b| b == b'\n').enumerate().filter_map(move |(i, raw)| {
        let line = i + 1;
        let text = match std::str::from_utf8(raw) {
            Ok(t) => t,
            Err(_) => return Some(Err(Error::parse(path, line, "invalid UTF-8"))),
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            None
        } else {
            Some(Ok((line, fields)))
        }
    })
}

fn expect_fields(path: &str, line: usize, fields: &[&str], n: usize, layout: &str) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(
            path,
            line,
            format!("expected {n} fields `{layout}`, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn real(path: &str, line: usize, field: &str, what: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(path, line, format!("invalid {what} `{field}`"))),
    }
}

/// Diversity judgments for one topic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopicQrels {
    pub aspects: BTreeSet<AspectId>,
    /// `doc -> aspect -> grade`, zero grades included.
    pub grades: BTreeMap<DocId, BTreeMap<AspectId, f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    pub topics: BTreeMap<TopicId, TopicQrels>,
    pub warnings: Vec<String>,
}

/// Parses `topic subtopic docid judgment` lines. Negative judgments read as
/// 0; in binary mode positive grades read as 1. A repeated
/// `(topic, subtopic, doc)` keeps the last grade and records a warning.
pub fn parse_qrels(path: &str, bytes: &[u8], binary: bool) -> Result<Qrels> {
    let mut qrels = Qrels::default();
    for item in lines(path, bytes) {
        let (line, f) = item?;
        expect_fields(path, line, &f, 4, "topic subtopic docid judgment")?;
        let grade = real(path, line, f[3], "judgment")?;
        let grade = if grade <= 0.0 {
            0.0
        } else if binary {
            1.0
        } else {
            grade
        };
        let topic = qrels.topics.entry(TopicId::from(f[0])).or_default();
        let aspect = AspectId::from(f[1]);
        topic.aspects.insert(aspect.clone());
        let previous = topic.grades.entry(DocId::from(f[2])).or_default().insert(aspect, grade);
        if previous.is_some() {
            qrels.warnings.push(format!(
                "{path}:{line}: duplicate judgment for ({}, {}, {}); keeping the last",
                f[0], f[1], f[2]
            ));
        }
    }
    Ok(qrels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc: DocId,
    pub rank: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    /// Per-topic entries in ranked order.
    pub topics: BTreeMap<TopicId, Vec<RunEntry>>,
    pub tags: BTreeSet<String>,
    pub warnings: Vec<String>,
}

impl Run {
    pub fn ranking(&self, topic: &TopicId) -> Vec<DocId> {
        self.topics
            .get(topic)
            .map(|entries| entries.iter().map(|e| e.doc.clone()).collect())
            .unwrap_or_default()
    }
}

/// Parses `qid Q0 docid rank score tag` lines and orders each topic by rank.
/// Duplicate or non-contiguous ranks trigger a warning and a re-rank by
/// descending score (ties by doc id). A document listed twice for one topic
/// is an error.
pub fn parse_run(path: &str, bytes: &[u8]) -> Result<Run> {
    let mut run = Run::default();
    let mut seen: BTreeMap<TopicId, BTreeMap<DocId, usize>> = BTreeMap::new();
    for item in lines(path, bytes) {
        let (line, f) = item?;
        expect_fields(path, line, &f, 6, "qid Q0 docid rank score tag")?;
        let rank: usize = f[3]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid rank `{}`", f[3])))?;
        let score = real(path, line, f[4], "score")?;
        let topic = TopicId::from(f[0]);
        let doc = DocId::from(f[2]);
        if let Some(first) = seen.entry(topic.clone()).or_default().insert(doc.clone(), line) {
            return Err(Error::parse(
                path,
                line,
                format!("document `{doc}` already listed for topic `{topic}` on line {first}"),
            ));
        }
        run.tags.insert(f[5].to_owned());
        run.topics.entry(topic).or_default().push(RunEntry { doc, rank, score });
    }
    for (topic, entries) in run.topics.iter_mut() {
        let mut ranks: Vec<usize> = entries.iter().map(|e| e.rank).collect();
        ranks.sort_unstable();
        let contiguous = ranks.iter().enumerate().all(|(i, &r)| r == i + 1);
        if contiguous {
            entries.sort_by_key(|e| e.rank);
        } else {
            run.warnings.push(format!(
                "{path}: topic `{topic}` has duplicate or non-contiguous ranks; re-ranked by score"
            ));
            entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc.cmp(&b.doc)));
            for (i, e) in entries.iter_mut().enumerate() {
                e.rank = i + 1;
            }
        }
    }
    Ok(run)
}

/// Parses `docid group` lines; a repeated docid accumulates groups.
pub fn parse_groups(path: &str, bytes: &[u8]) -> Result<BTreeMap<DocId, BTreeSet<GroupId>>> {
    let mut groups: BTreeMap<DocId, BTreeSet<GroupId>> = BTreeMap::new();
    for item in lines(path, bytes) {
        let (line, f) = item?;
        expect_fields(path, line, &f, 2, "docid group")?;
        groups.entry(DocId::from(f[0])).or_default().insert(GroupId::from(f[1]));
    }
    Ok(groups)
}

/// Parses `group probability` lines; the total must be 1 within 1e-6.
pub fn parse_desired(path: &str, bytes: &[u8]) -> Result<GroupDistribution> {
    let mut mass = Vec::new();
    let mut last_line = 0;
    for item in lines(path, bytes) {
        let (line, f) = item?;
        expect_fields(path, line, &f, 2, "group probability")?;
        let p = real(path, line, f[1], "probability")?;
        if p < 0.0 {
            return Err(Error::parse(path, line, format!("negative probability {p}")));
        }
        if mass.iter().any(|(g, _): &(GroupId, f64)| g.as_str() == f[0]) {
            return Err(Error::parse(path, line, format!("group `{}` listed twice", f[0])));
        }
        mass.push((GroupId::from(f[0]), p));
        last_line = line;
    }
    if mass.is_empty() {
        return Err(Error::parse(path, 1, "no groups listed"));
    }
    GroupDistribution::with_tolerance(mass, 1e-6).map_err(|e| Error::parse(path, last_line, e.to_string()))
}
