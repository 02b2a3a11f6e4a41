//! Ideal rankings for the novelty-decayed gain: greedy approximation and
//! exhaustive search for small pools.

use std::cmp::Ordering;

use super::{dcg, discount, gain, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{IdcgMode, PrefixState, Topic};

#[derive(Debug, Clone, PartialEq)]
pub struct IdealRanking {
    /// Candidate indices in ideal order.
    pub docs: Vec<usize>,
    pub gains: Vec<f64>,
    pub dcg: f64,
}

/// Greedy ideal: at each rank take the document with the largest gain
/// against the current prefix. Gains within [`TIE_TOLERANCE`] are ties,
/// broken by higher topic-level relevance, then lower default rank, then
/// doc id.
pub fn greedy_ideal(topic: &Topic, k: usize, alpha: f64) -> IdealRanking {
    let depth = k.min(topic.pool_size());
    let mut remaining: Vec<usize> = (0..topic.pool_size()).collect();
    let mut state = PrefixState::new(topic);
    let mut docs = Vec::with_capacity(depth);
    let mut gains = Vec::with_capacity(depth);

    for _ in 0..depth {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &d) in remaining.iter().enumerate() {
            let g = gain(topic, &state, d, alpha);
            let better = match best {
                None => true,
                Some((b, bg)) => {
                    let bd = remaining[b];
                    if g > bg + TIE_TOLERANCE {
                        true
                    } else if g < bg - TIE_TOLERANCE {
                        false
                    } else {
                        greedy_tie_break(topic, d, bd) == Ordering::Less
                    }
                }
            };
            if better {
                best = Some((slot, g));
            }
        }
        let (slot, g) = best.expect("remaining pool is non-empty");
        let d = remaining.remove(slot);
        state.push(topic, d);
        docs.push(d);
        gains.push(g);
    }
    let dcg = dcg(&gains, depth);
    IdealRanking { docs, gains, dcg }
}

/// `Less` when `a` should be preferred over `b`.
fn greedy_tie_break(topic: &Topic, a: usize, b: usize) -> Ordering {
    topic
        .relevance(b)
        .partial_cmp(&topic.relevance(a))
        .unwrap_or(Ordering::Equal)
        .then_with(|| topic.tie_rank(a).cmp(&topic.tie_rank(b)))
}

/// Exhaustive maximization of DCG over every ordering of `min(k, pool)`
/// documents. Refuses pools larger than `max_pool`.
pub fn exact_ideal(topic: &Topic, k: usize, alpha: f64, max_pool: usize) -> Result<IdealRanking> {
    let n = topic.pool_size();
    if n > max_pool {
        return Err(Error::ExactSearchTooLarge {
            pool: n,
            bound: max_pool,
        });
    }
    let depth = k.min(n);
    let mut search = Search {
        topic,
        alpha,
        depth,
        used: vec![false; n],
        path: Vec::with_capacity(depth),
        best_value: f64::NEG_INFINITY,
        best_path: Vec::new(),
    };
    // candidates visited in tie order so the first optimum found is the
    // deterministic one
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&d| topic.tie_rank(d));
    search.run(&order, &PrefixState::new(topic), 0.0);

    let docs = search.best_path;
    let gains = super::gains_of(topic, &docs, alpha);
    let dcg = dcg(&gains, depth);
    Ok(IdealRanking { docs, gains, dcg })
}

struct Search<'a> {
    topic: &'a Topic,
    alpha: f64,
    depth: usize,
    used: Vec<bool>,
    path: Vec<usize>,
    best_value: f64,
    best_path: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, order: &[usize], state: &PrefixState, value: f64) {
        let rank = self.path.len();
        if rank == self.depth {
            if value > self.best_value {
                self.best_value = value;
                self.best_path = self.path.clone();
            }
            return;
        }
        let mut current: Vec<(usize, f64)> = order
            .iter()
            .filter(|&&d| !self.used[d])
            .map(|&d| (d, gain(self.topic, state, d, self.alpha)))
            .collect();

        // Gains only shrink as coverage grows, so placing today's largest
        // gains at the earliest remaining ranks bounds any completion.
        let mut sorted: Vec<f64> = current.iter().map(|(_, g)| *g).collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        let bound: f64 = sorted
            .iter()
            .take(self.depth - rank)
            .enumerate()
            .map(|(j, g)| g / discount(rank + j + 1))
            .sum();
        if value + bound <= self.best_value {
            return;
        }

        current.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
        for (d, g) in current {
            self.used[d] = true;
            self.path.push(d);
            let next = state.appended(self.topic, d);
            self.run(order, &next, value + g / discount(rank + 1));
            self.path.pop();
            self.used[d] = false;
        }
    }
}

/// Ideal DCG at cutoff `k` under the configured mode.
pub fn ideal_dcg(topic: &Topic, k: usize, alpha: f64, mode: IdcgMode) -> Result<IdealRanking> {
    match mode {
        IdcgMode::Greedy => Ok(greedy_ideal(topic, k, alpha)),
        IdcgMode::Exact { max_pool } => exact_ideal(topic, k, alpha, max_pool),
    }
}
