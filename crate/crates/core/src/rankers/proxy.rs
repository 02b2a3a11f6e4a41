//! Proxy relevance derived from a default ranking, for running without gold
//! judgments. Every proxy grade is assigned to the document's own groups,
//! which double as aspects.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AspectId, Judgments, Topic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProxyKind {
    /// Grade `1/log2(rank+1)`: every listed document relevant, higher ranks
    /// more so.
    #[default]
    GradedLog,
    /// Grade 1 for the top `n`, 0 below.
    BinaryTop(usize),
    /// Grade 1 for every listed document.
    Uniform,
}

impl fmt::Display for ProxyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProxyKind::GradedLog => f.write_str("graded-log"),
            ProxyKind::BinaryTop(n) => write!(f, "binary-top:{n}"),
            ProxyKind::Uniform => f.write_str("uniform"),
        }
    }
}

impl FromStr for ProxyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graded-log" => Ok(ProxyKind::GradedLog),
            "uniform" => Ok(ProxyKind::Uniform),
            _ => {
                let n = s
                    .strip_prefix("binary-top:")
                    .ok_or_else(|| format!("unknown proxy `{s}` (graded-log, binary-top:N, uniform)"))?;
                n.parse()
                    .map(ProxyKind::BinaryTop)
                    .map_err(|_| format!("invalid N in `{s}`"))
            }
        }
    }
}

/// Proxy judgments plus the aspect set they use (the topic's groups).
pub fn build_proxy_judgments(topic: &Topic, proxy: ProxyKind) -> Result<(Vec<AspectId>, Judgments)> {
    if topic.default_ranking().is_empty() {
        return Err(Error::EmptyDefaultRanking(topic.id().to_string()));
    }
    let binary = !matches!(proxy, ProxyKind::GradedLog);
    let mut judgments = Judgments::new(binary);
    for (pos, doc_id) in topic.default_ranking().iter().enumerate() {
        let rank = pos + 1;
        let grade = match proxy {
            ProxyKind::GradedLog => 1.0 / ((rank + 1) as f64).log2(),
            ProxyKind::BinaryTop(n) if rank <= n => 1.0,
            ProxyKind::BinaryTop(_) => 0.0,
            ProxyKind::Uniform => 1.0,
        };
        let idx = topic.doc_index(doc_id).expect("default ranking is validated");
        for &(g, _) in &topic.profile(idx).group_shares {
            judgments.set(doc_id.clone(), topic.groups()[g].as_str(), grade)?;
        }
    }
    let aspects = topic.groups().iter().map(|g| AspectId::from(g.as_str())).collect();
    Ok((aspects, judgments))
}

/// The topic re-judged with proxy relevance.
pub fn proxy_topic(topic: &Topic, proxy: ProxyKind) -> Result<Topic> {
    let (aspects, judgments) = build_proxy_judgments(topic, proxy)?;
    topic.with_judgments(aspects, judgments)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::model::{DocId, Document};

    fn topic() -> Topic {
        let docs = vec![
            Document::new("d1").with_groups(["A"]),
            Document::new("d2").with_groups(["B"]),
            Document::new("d3").with_groups(["A", "B"]),
        ];
        let default = ["d1", "d2", "d3"].map(DocId::from).to_vec();
        Topic::new("t", [AspectId::from("x")], docs, Judgments::default(), default).unwrap()
    }

    #[test]
    fn graded_log_grades() {
        let t = proxy_topic(&topic(), ProxyKind::GradedLog).unwrap();
        assert_abs_diff_eq!(t.relevance(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.relevance(1), 0.630930, epsilon = 1e-6);
        assert_abs_diff_eq!(t.relevance(2), 0.5, epsilon = 1e-12);
        // multi-group doc graded on both of its groups
        assert_eq!(t.judgments().grade(&"d3".into(), &"A".into()), 0.5);
        assert_eq!(t.judgments().grade(&"d3".into(), &"B".into()), 0.5);
    }

    #[test]
    fn binary_top_and_uniform() {
        let t = proxy_topic(&topic(), ProxyKind::BinaryTop(2)).unwrap();
        assert_eq!((0..3).map(|d| t.relevance(d)).collect::<Vec<_>>(), vec![1.0, 1.0, 0.0]);
        let t = proxy_topic(&topic(), ProxyKind::Uniform).unwrap();
        assert_eq!((0..3).map(|d| t.relevance(d)).collect::<Vec<_>>(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn requires_default_ranking() {
        let t = Topic::new("t", [AspectId::from("x")], vec![Document::new("d")], Judgments::default(), vec![]).unwrap();
        assert!(build_proxy_judgments(&t, ProxyKind::Uniform).is_err());
    }

    #[test]
    fn parses_flag_values() {
        assert_eq!("graded-log".parse::<ProxyKind>().unwrap(), ProxyKind::GradedLog);
        assert_eq!("binary-top:5".parse::<ProxyKind>().unwrap(), ProxyKind::BinaryTop(5));
        assert!("binary-top:x".parse::<ProxyKind>().is_err());
        assert!("nope".parse::<ProxyKind>().is_err());
    }
}
