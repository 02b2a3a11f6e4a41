//! Report writers. Reals are rendered with six decimals so outputs diff
//! cleanly across platforms.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use super::bundle::DatasetBundle;
use crate::model::{DocId, TopicId};
use crate::stats::Correlation;

/// Column order of the TSV report.
pub const REPORT_HEADER: [&str; 8] = ["algorithm", "metric", "k", "mean", "min", "max", "excluded", "flags"];

pub const CORRELATION_HEADER: [&str; 10] = [
    "pair",
    "k",
    "n",
    "pearson_r",
    "pearson_p",
    "pearson_sig",
    "spearman_rho",
    "spearman_p",
    "spearman_sig",
    "approx",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub metric: String,
    pub k: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Topics excluded as degenerate.
    pub excluded: usize,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    /// Pretty-printed JSON.
    Structured,
}

pub fn real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let s = format!("{v:.6}");
        // avoid "-0.000000"
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_owned()
        } else {
            s
        }
    }
}

fn json_real(v: f64) -> Value {
    if v.is_finite() {
        let rounded: f64 = real(v).parse().expect("formatted real parses");
        json!(rounded)
    } else {
        json!(real(v))
    }
}

fn flags(f: &[String]) -> String {
    if f.is_empty() {
        "-".into()
    } else {
        f.join(",")
    }
}

pub fn write_report(rows: &[ReportRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv => {
            let mut out = REPORT_HEADER.join("\t");
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.algorithm,
                    r.metric,
                    r.k,
                    real(r.mean),
                    real(r.min),
                    real(r.max),
                    r.excluded,
                    flags(&r.flags)
                );
            }
            out
        }
        ReportFormat::Structured => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "algorithm": r.algorithm,
                        "metric": r.metric,
                        "k": r.k,
                        "mean": json_real(r.mean),
                        "min": json_real(r.min),
                        "max": json_real(r.max),
                        "excluded": r.excluded,
                        "flags": r.flags,
                    })
                })
                .collect();
            let mut out = serde_json::to_string_pretty(&Value::Array(rows)).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub pair: String,
    pub k: usize,
    pub pearson: Correlation,
    pub spearman: Correlation,
}

pub fn write_correlations(rows: &[CorrelationRow]) -> String {
    let mut out = CORRELATION_HEADER.join("\t");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.pair,
            r.k,
            r.pearson.n,
            real(r.pearson.coefficient),
            real(r.pearson.p_value),
            or_dash(r.pearson.significance().stars()),
            real(r.spearman.coefficient),
            real(r.spearman.p_value),
            or_dash(r.spearman.significance().stars()),
            if r.spearman.approximate { "yes" } else { "no" },
        );
    }
    out
}

fn or_dash(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}

/// Rankings in run format `topic Q0 doc rank score tag`, score `1/rank`.
pub fn write_run<'a, I>(rankings: I, tag: &str) -> String
where
    I: IntoIterator<Item = (&'a TopicId, &'a [DocId])>,
{
    let mut out = String::new();
    for (topic, docs) in rankings {
        for (i, d) in docs.iter().enumerate() {
            let rank = i + 1;
            let _ = writeln!(out, "{topic} Q0 {d} {rank} {} {tag}", real(1.0 / rank as f64));
        }
    }
    out
}

/// Judgments in diversity qrels format `topic subtopic doc grade`.
pub fn write_qrels(bundle: &DatasetBundle) -> String {
    let mut out = String::new();
    for t in &bundle.topics {
        for (d, a, g) in t.judgments().iter() {
            let _ = writeln!(out, "{} {a} {d} {}", t.id(), grade(g));
        }
    }
    out
}

fn grade(g: f64) -> String {
    if g.fract() == 0.0 {
        format!("{g:.0}")
    } else {
        real(g)
    }
}

/// Group memberships as `doc group` lines.
pub fn write_groups(bundle: &DatasetBundle) -> String {
    let mut out = String::new();
    for t in &bundle.topics {
        for d in t.candidates() {
            for g in &d.groups {
                let _ = writeln!(out, "{} {g}", d.doc_id);
            }
        }
    }
    out
}
