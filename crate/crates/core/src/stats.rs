//! Cross-topic aggregation and correlation analysis.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::TopicId;

/// Per-topic values of one metric; each `(topic, cutoff)` pair appears once.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricSeries {
    pub metric: String,
    pub values: Vec<(TopicId, usize, f64)>,
    /// Topics left out because their value was degenerate.
    pub excluded: usize,
}

impl MetricSeries {
    pub fn new(metric: impl Into<String>) -> Self {
        Self {
            metric: metric.into(),
            values: Vec::new(),
            excluded: 0,
        }
    }

    /// Records a value; NaN and repeated `(topic, cutoff)` pairs are rejected.
    pub fn push(&mut self, topic: TopicId, cutoff: usize, value: f64) -> Result<()> {
        if value.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "NaN value for {} on topic `{topic}` at {cutoff}",
                self.metric
            )));
        }
        if self.values.iter().any(|(t, k, _)| *t == topic && *k == cutoff) {
            return Err(Error::InvalidConfig(format!(
                "{} already has a value for topic `{topic}` at {cutoff}",
                self.metric
            )));
        }
        self.values.push((topic, cutoff, value));
        Ok(())
    }

    pub fn exclude(&mut self) {
        self.excluded += 1;
    }

    /// Values at one cutoff, sorted by topic id.
    pub fn at(&self, cutoff: usize) -> Vec<(&TopicId, f64)> {
        let mut out: Vec<(&TopicId, f64)> = self
            .values
            .iter()
            .filter(|(_, k, _)| *k == cutoff)
            .map(|(t, _, v)| (t, *v))
            .collect();
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Aggregation {
    Mean,
    Min,
    Max,
}

/// Mean, min or max over topics at a fixed cutoff.
pub fn aggregate(series: &MetricSeries, cutoff: usize, how: Aggregation) -> Result<f64> {
    let values: Vec<f64> = series.at(cutoff).into_iter().map(|(_, v)| v).collect();
    if values.is_empty() {
        return Err(Error::EmptySeries(format!("{} at {cutoff}", series.metric)));
    }
    Ok(match how {
        Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Aggregation::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Significance level at the conventional .05/.01/.001 thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Significance {
    None,
    P05,
    P01,
    P001,
}

impl Significance {
    pub fn of(p: f64) -> Self {
        if p < 0.001 {
            Significance::P001
        } else if p < 0.01 {
            Significance::P01
        } else if p < 0.05 {
            Significance::P05
        } else {
            Significance::None
        }
    }

    pub fn stars(&self) -> &'static str {
        match self {
            Significance::None => "",
            Significance::P05 => "*",
            Significance::P01 => "**",
            Significance::P001 => "***",
        }
    }
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.stars())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub coefficient: f64,
    pub p_value: f64,
    pub n: usize,
    /// The t approximation is rough for this sample size.
    pub approximate: bool,
}

impl Correlation {
    pub fn significance(&self) -> Significance {
        Significance::of(self.p_value)
    }
}

fn check_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 pairs, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite value".into()));
    }
    Ok(())
}

fn sample_r(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of `r` with `t = r·sqrt((n-2)/(1-r²))` on `n-2` dof.
fn t_p_value(r: f64, n: usize) -> f64 {
    let dof = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r.abs() * (dof / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof).expect("dof >= 1");
    (2.0 * (1.0 - dist.cdf(t))).clamp(0.0, 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pairs(x, y)?;
    let r = sample_r(x, y)?;
    Ok(Correlation {
        coefficient: r,
        p_value: t_p_value(r, x.len()),
        n: x.len(),
        approximate: false,
    })
}

/// 1-based ranks with ties sharing their mean rank.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho as the Pearson correlation of mid-ranks. p-values for
/// `n < 10` are flagged approximate.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pairs(x, y)?;
    let r = sample_r(&mid_ranks(x), &mid_ranks(y))?;
    Ok(Correlation {
        coefficient: r,
        p_value: t_p_value(r, x.len()),
        n: x.len(),
        approximate: x.len() < 10,
    })
}
