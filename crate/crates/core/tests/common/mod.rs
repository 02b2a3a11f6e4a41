//! Direct-formula oracles over plain string maps, plus random instances.
//! Nothing here reuses the library's metric code; it only converts an
//! instance into library types for comparison.

#![allow(dead_code)]

use std::collections::BTreeMap;

use fairir::model::{AspectId, DocId, Document, GroupDistribution, Judgments, Ranking, Topic};
use rand::seq::SliceRandom;
use rand::Rng;

pub const OTHER: &str = "__other__";

#[derive(Debug, Clone)]
pub struct Instance {
    pub aspects: Vec<String>,
    /// `(doc id, groups)` in candidate order.
    pub docs: Vec<(String, Vec<String>)>,
    /// `(doc, aspect) -> grade`, positive grades only.
    pub grades: BTreeMap<(String, String), f64>,
    pub binary: bool,
    pub default: Vec<String>,
    pub ranking: Vec<String>,
    pub desired: BTreeMap<String, f64>,
}

impl Instance {
    pub fn topic(&self) -> Topic {
        let mut j = Judgments::new(self.binary);
        for ((d, a), g) in &self.grades {
            j.set(d.as_str(), a.as_str(), *g).unwrap();
        }
        let docs = self
            .docs
            .iter()
            .map(|(d, gs)| Document::new(d.as_str()).with_groups(gs.iter().map(String::as_str)))
            .collect();
        let default = self.default.iter().map(|d| DocId::from(d.as_str())).collect();
        Topic::new("q", self.aspects.iter().map(|a| AspectId::from(a.as_str())), docs, j, default).unwrap()
    }

    pub fn library_ranking(&self) -> Ranking {
        Ranking::new(self.ranking.iter().map(String::as_str)).unwrap()
    }

    pub fn library_desired(&self) -> GroupDistribution {
        GroupDistribution::new(self.desired.iter().map(|(g, p)| (g.as_str(), *p))).unwrap()
    }

    pub fn groups_of(&self, doc: &str) -> Vec<String> {
        let gs = &self.docs.iter().find(|(d, _)| d == doc).unwrap().1;
        if gs.is_empty() {
            vec![OTHER.to_owned()]
        } else {
            gs.clone()
        }
    }

    pub fn grade(&self, doc: &str, aspect: &str) -> f64 {
        self.grades.get(&(doc.to_owned(), aspect.to_owned())).copied().unwrap_or(0.0)
    }

    /// Topic-level relevance: the largest aspect grade.
    pub fn relevance(&self, doc: &str) -> f64 {
        self.aspects.iter().map(|a| self.grade(doc, a)).fold(0.0, f64::max)
    }

    pub fn universe(&self) -> Vec<String> {
        let mut all: Vec<String> = self.docs.iter().flat_map(|(d, _)| self.groups_of(d)).collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Group shares of a prefix with fractional credit `1/m` per membership.
pub fn distribution(inst: &Instance, prefix: &[String]) -> BTreeMap<String, f64> {
    let mut mass: BTreeMap<String, f64> = BTreeMap::new();
    for d in prefix {
        let gs = inst.groups_of(d);
        for g in &gs {
            *mass.entry(g.clone()).or_default() += 1.0 / gs.len() as f64;
        }
    }
    for v in mass.values_mut() {
        *v /= prefix.len() as f64;
    }
    mass
}

/// `Σ p·ln(p/q)` over groups with `p > 0`, floored at 0.
pub fn kl(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut total = 0.0;
    for (g, &pg) in p {
        if pg > 0.0 {
            let qg = q.get(g).copied().unwrap_or(0.0);
            total += pg * (pg / qg).ln();
        }
    }
    total.max(0.0)
}

pub fn prefix_kls(inst: &Instance, ranking: &[String]) -> Vec<f64> {
    (1..=ranking.len())
        .map(|i| kl(&distribution(inst, &ranking[..i]), &inst.desired))
        .collect()
}

/// Gain of `doc` after `prefix`: `Σ_a J(doc,a)·(1-α)^{r_a}` with `r_a` the
/// summed grades of earlier documents on `a`.
pub fn gain(inst: &Instance, prefix: &[String], doc: &str, alpha: f64) -> f64 {
    inst.aspects
        .iter()
        .map(|a| {
            let r: f64 = prefix.iter().map(|d| inst.grade(d, a)).sum();
            inst.grade(doc, a) * (1.0 - alpha).powf(r)
        })
        .sum()
}

pub fn gains(inst: &Instance, ranking: &[String], alpha: f64) -> Vec<f64> {
    (0..ranking.len()).map(|i| gain(inst, &ranking[..i], &ranking[i], alpha)).collect()
}

pub fn log_discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

pub fn dcg(gains: &[f64]) -> f64 {
    gains.iter().enumerate().map(|(i, g)| g / log_discount(i + 1)).sum()
}

fn default_rank(inst: &Instance, doc: &str) -> usize {
    inst.default.iter().position(|d| d == doc).unwrap_or(usize::MAX)
}

/// Greedy ideal ordering: largest gain, ties (1e-9) by relevance, default
/// rank, then doc id.
pub fn greedy_ideal(inst: &Instance, k: usize, alpha: f64) -> Vec<String> {
    let mut remaining: Vec<String> = inst.docs.iter().map(|(d, _)| d.clone()).collect();
    let mut chosen: Vec<String> = Vec::new();
    while chosen.len() < k && !remaining.is_empty() {
        let scored: Vec<(f64, &String)> = remaining.iter().map(|d| (gain(inst, &chosen, d, alpha), d)).collect();
        let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let pick = scored
            .iter()
            .filter(|s| s.0 >= best - 1e-9)
            .min_by(|a, b| {
                inst.relevance(b.1)
                    .partial_cmp(&inst.relevance(a.1))
                    .unwrap()
                    .then(default_rank(inst, a.1).cmp(&default_rank(inst, b.1)))
                    .then(a.1.cmp(b.1))
            })
            .unwrap()
            .1
            .clone();
        remaining.retain(|d| *d != pick);
        chosen.push(pick);
    }
    chosen
}

/// Maximum DCG over all orderings of at most `k` documents.
pub fn brute_force_idcg(inst: &Instance, k: usize, alpha: f64) -> f64 {
    fn go(inst: &Instance, k: usize, alpha: f64, prefix: &mut Vec<String>, rest: &mut Vec<String>, best: &mut f64) {
        let value = dcg(&gains(inst, prefix, alpha));
        if value > *best {
            *best = value;
        }
        if prefix.len() == k {
            return;
        }
        for i in 0..rest.len() {
            let d = rest.remove(i);
            prefix.push(d);
            go(inst, k, alpha, prefix, rest, best);
            let d = prefix.pop().unwrap();
            rest.insert(i, d);
        }
    }
    let mut rest: Vec<String> = inst.docs.iter().map(|(d, _)| d.clone()).collect();
    let mut best = 0.0;
    go(inst, k, alpha, &mut Vec::new(), &mut rest, &mut best);
    best
}

pub fn top(ranking: &[String], k: usize) -> &[String] {
    &ranking[..k.min(ranking.len())]
}

pub fn idcg(inst: &Instance, k: usize, alpha: f64) -> f64 {
    dcg(&gains(inst, &greedy_ideal(inst, k, alpha), alpha))
}

/// `None` when the ideal DCG is zero.
pub fn alpha_ndcg(inst: &Instance, k: usize, alpha: f64) -> Option<f64> {
    let ideal = idcg(inst, k, alpha);
    (ideal > 0.0).then(|| dcg(&gains(inst, top(&inst.ranking, k), alpha)) / ideal)
}

pub fn fair(inst: &Instance, k: usize, alpha: f64) -> Option<f64> {
    let ideal = idcg(inst, k, alpha);
    let r = top(&inst.ranking, k);
    let g = gains(inst, r, alpha);
    let d = prefix_kls(inst, r);
    let total: f64 = (0..r.len()).map(|i| g[i] / ((d[i] + 1.0) * log_discount(i + 1))).sum();
    (ideal > 0.0).then(|| total / ideal)
}

pub fn kl_at(inst: &Instance, k: usize) -> f64 {
    kl(&distribution(inst, top(&inst.ranking, k)), &inst.desired)
}

fn z(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / log_discount(i)).sum()
}

pub fn ndkl(inst: &Instance, k: usize) -> f64 {
    let d = prefix_kls(inst, top(&inst.ranking, k));
    d.iter().enumerate().map(|(i, v)| v / log_discount(i + 1)).sum::<f64>() / z(d.len())
}

pub fn ndrkl(inst: &Instance, k: usize) -> f64 {
    let d = prefix_kls(inst, top(&inst.ranking, k));
    d.iter()
        .enumerate()
        .map(|(i, v)| 1.0 / ((v + 1.0) * log_discount(i + 1)))
        .sum::<f64>()
        / z(d.len())
}

fn rbp_scale(inst: &Instance) -> f64 {
    inst.docs.iter().map(|(d, _)| inst.relevance(d)).fold(1.0, f64::max)
}

pub fn rbp(inst: &Instance, k: usize, p: f64) -> f64 {
    let scale = rbp_scale(inst);
    top(&inst.ranking, k)
        .iter()
        .enumerate()
        .map(|(i, d)| (1.0 - p) * inst.relevance(d) / scale * p.powi(i as i32))
        .sum()
}

pub fn fair_rbp(inst: &Instance, k: usize, p: f64) -> Option<f64> {
    let scale = rbp_scale(inst);
    let mut rels: Vec<f64> = inst.docs.iter().map(|(d, _)| inst.relevance(d) / scale).collect();
    rels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let ideal: f64 = rels.iter().take(k).enumerate().map(|(i, r)| (1.0 - p) * r * p.powi(i as i32)).sum();
    let r = top(&inst.ranking, k);
    let d = prefix_kls(inst, r);
    let total: f64 = r
        .iter()
        .enumerate()
        .map(|(i, doc)| (1.0 - p) * inst.relevance(doc) / scale * p.powi(i as i32) / (d[i] + 1.0))
        .sum();
    (ideal > 0.0).then(|| total / ideal)
}

/// Shape limits for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_pool: usize,
    pub max_aspects: usize,
    pub max_groups: usize,
}

pub const SMALL: Shape = Shape {
    max_pool: 10,
    max_aspects: 4,
    max_groups: 3,
};

/// A random topic with a random ranking and a desired distribution with
/// positive mass on every group of the universe.
pub fn random_instance<R: Rng>(rng: &mut R, shape: Shape) -> Instance {
    let pool = rng.random_range(1..=shape.max_pool);
    let n_aspects = rng.random_range(1..=shape.max_aspects);
    let n_groups = rng.random_range(1..=shape.max_groups);
    let aspects: Vec<String> = (0..n_aspects).map(|a| format!("a{a}")).collect();
    let group_names: Vec<String> = (0..n_groups).map(|g| ["A", "B", "C", "D"][g].to_owned()).collect();
    let binary = rng.random_bool(0.5);

    let mut docs = Vec::new();
    let mut grades = BTreeMap::new();
    for i in 0..pool {
        let id = format!("d{i}");
        let mut gs: Vec<String> = group_names.iter().filter(|_| rng.random_bool(0.45)).cloned().collect();
        if gs.is_empty() && rng.random_bool(0.7) {
            gs.push(group_names[rng.random_range(0..n_groups)].clone());
        }
        for a in &aspects {
            if rng.random_bool(0.4) {
                let g = if binary { 1.0 } else { rng.random_range(1..=3) as f64 };
                grades.insert((id.clone(), a.clone()), g);
            }
        }
        docs.push((id, gs));
    }
    let mut ids: Vec<String> = docs.iter().map(|(d, _)| d.clone()).collect();
    ids.shuffle(rng);
    let default: Vec<String> = if rng.random_bool(0.7) {
        ids[..rng.random_range(0..=pool)].to_vec()
    } else {
        Vec::new()
    };
    ids.shuffle(rng);
    let ranking = ids[..rng.random_range(1..=pool)].to_vec();

    let mut inst = Instance {
        aspects,
        docs,
        grades,
        binary,
        default,
        ranking,
        desired: BTreeMap::new(),
    };
    let universe = inst.universe();
    let weights: Vec<f64> = universe.iter().map(|_| rng.random_range(1..=4) as f64).collect();
    let total: f64 = weights.iter().sum();
    inst.desired = universe.into_iter().zip(weights).map(|(g, w)| (g, w / total)).collect();
    inst
}

/// Every document in one group `G`, desired `{G: 1}`.
pub fn single_group<R: Rng>(rng: &mut R, shape: Shape) -> Instance {
    let mut inst = random_instance(rng, shape);
    for (_, gs) in inst.docs.iter_mut() {
        *gs = vec!["G".to_owned()];
    }
    inst.desired = BTreeMap::from([("G".to_owned(), 1.0)]);
    inst
}
