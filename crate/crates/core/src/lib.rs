//! Fairness-aware evaluation and re-ranking for information retrieval.
//!
//! The crate computes the FAIR metric, which divides each rank's utility by
//! `d_KL(D_{r^i} || D*) + 1` where `D_{r^i}` is the group distribution of the
//! top-`i` results and `D*` a desired distribution, together with classical
//! utility metrics (α-nDCG, nDCG, RBP) and fairness metrics (KL, nDKL,
//! nDRKL, skew, feasibility). It also provides the FAIR ε-greedy re-ranker,
//! TREC-style file ingestion, a seeded synthetic dataset generator, and
//! correlation analysis between metrics.
//!
//! ```
//! use fairir::metrics::fair_alpha_ndcg;
//! use fairir::model::{AspectId, Document, GroupDistribution, Judgments, MetricConfig, Ranking, Topic};
//!
//! # fn main() -> Result<(), fairir::Error> {
//! let mut judgments = Judgments::new(true);
//! judgments.set("d1", "a1", 1.0)?;
//! judgments.set("d2", "b1", 1.0)?;
//! let docs = vec![
//!     Document::new("d1").with_groups(["A"]),
//!     Document::new("d2").with_groups(["B"]),
//! ];
//! let topic = Topic::new("q1", ["a1", "b1"].map(AspectId::from), docs, judgments, vec![])?;
//! let desired = GroupDistribution::new([("A", 0.5), ("B", 0.5)])?;
//! let ranking = Ranking::new(["d1", "d2"])?;
//!
//! let fair = fair_alpha_ndcg(&topic, &ranking, &desired, &MetricConfig::default(), 2)?;
//! assert!((fair.value - 0.74899).abs() < 1e-5);
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rankers;
pub mod stats;

pub use error::{Error, Result};
