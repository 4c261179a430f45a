//! Benchmark harness: samples related entity pairs, buckets them by
//! connectedness and runs every requested strategy on each pair.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::{general_enum, naive_enum, EnumOptions, EnumOutput, EnumStrategy};
use crate::error::{Error, Result};
use crate::kb::{classify_connectedness, Connectedness, EntityId, KnowledgeBase};
use crate::pattern::{canonical_labeling, CanonicalForm, ExplanationInstance};

/// Path length limit used for connectedness, one less than the default
/// pattern size limit.
pub const CONNECTEDNESS_LIMIT: usize = 4;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BenchPair {
    pub start: EntityId,
    pub end: EntityId,
    pub connectedness: u64,
    pub class: Connectedness,
}

/// Draws up to `count` distinct pairs: a random entity with at least one
/// edge, and a random entity at undirected distance one or two from it.
pub fn sample_pairs(kb: &KnowledgeBase, count: usize, seed: u64) -> Vec<BenchPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<EntityId> = kb.entity_ids().filter(|&e| kb.degree(e).unwrap_or(0) > 0).collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 50 + 100 {
        attempts += 1;
        let Some(&start) = candidates.choose(&mut rng) else {
            break;
        };
        let Some(end) = related(kb, start, &mut rng) else {
            continue;
        };
        if !seen.insert((start, end)) {
            continue;
        }
        out.push(pair(kb, start, end));
    }
    if out.len() < count {
        log::warn!("found only {} of {} requested pairs", out.len(), count);
    }
    out
}

/// Samples until each connectedness class holds `per_class` pairs or the
/// attempt budget runs out.
pub fn sample_pairs_by_class(kb: &KnowledgeBase, per_class: usize, seed: u64, max_attempts: usize) -> Vec<BenchPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<EntityId> = kb.entity_ids().filter(|&e| kb.degree(e).unwrap_or(0) > 0).collect();
    let mut buckets: [Vec<BenchPair>; 3] = Default::default();
    let mut seen = BTreeSet::new();
    for _ in 0..max_attempts {
        if buckets.iter().all(|b| b.len() >= per_class) {
            break;
        }
        let Some(&start) = candidates.choose(&mut rng) else {
            break;
        };
        let Some(end) = related(kb, start, &mut rng) else {
            continue;
        };
        if !seen.insert((start, end)) {
            continue;
        }
        let p = pair(kb, start, end);
        let bucket = &mut buckets[p.class as usize];
        if bucket.len() < per_class {
            bucket.push(p);
        }
    }
    for (class, b) in [Connectedness::Low, Connectedness::Medium, Connectedness::High].iter().zip(&buckets) {
        if b.len() < per_class {
            log::warn!("found only {} of {} {class} pairs", b.len(), per_class);
        }
    }
    buckets.into_iter().flatten().collect()
}

fn related(kb: &KnowledgeBase, start: EntityId, rng: &mut ChaCha8Rng) -> Option<EntityId> {
    let mut near = BTreeSet::new();
    for a in kb.incident(start) {
        near.insert(a.other);
        for b in kb.incident(a.other) {
            near.insert(b.other);
        }
    }
    near.remove(&start);
    if near.is_empty() {
        return None;
    }
    let i = rng.gen_range(0..near.len());
    near.into_iter().nth(i)
}

fn pair(kb: &KnowledgeBase, start: EntityId, end: EntityId) -> BenchPair {
    let c = kb.connectedness(start, end, CONNECTEDNESS_LIMIT).unwrap_or(0);
    BenchPair {
        start,
        end,
        connectedness: c,
        class: classify_connectedness(c),
    }
}

/// A benchmarked enumerator: the naive baseline or a path+union combination.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BenchStrategy {
    Naive,
    Union(EnumStrategy),
}

impl fmt::Display for BenchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchStrategy::Naive => f.write_str("naive-enum"),
            BenchStrategy::Union(s) => s.fmt(f),
        }
    }
}

impl FromStr for BenchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "naive-enum" {
            Ok(BenchStrategy::Naive)
        } else {
            s.parse().map(BenchStrategy::Union)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub pair: String,
    pub class: String,
    pub strategy: String,
    pub wall_ms: u128,
    pub paths: u64,
    pub merges: u64,
    pub explanations: u64,
    pub duplicates: u64,
}

pub fn run_strategy(
    kb: &KnowledgeBase,
    p: &BenchPair,
    n: usize,
    strategy: BenchStrategy,
    opts: &EnumOptions,
) -> Result<(EnumOutput, Duration)> {
    let t = Instant::now();
    let out = match strategy {
        BenchStrategy::Naive => naive_enum(kb, p.start, p.end, n, opts)?,
        BenchStrategy::Union(s) => general_enum(kb, p.start, p.end, n, s, opts)?,
    };
    Ok((out, t.elapsed()))
}

type ExplanationSet = BTreeSet<(CanonicalForm, Vec<ExplanationInstance>)>;

fn explanation_set(out: &EnumOutput) -> ExplanationSet {
    out.explanations
        .iter()
        .map(|e| {
            let (form, c) = e.clone().canonicalize();
            (form, c.instances)
        })
        .collect()
}

/// Runs every strategy on every pair. Explanation sets must agree across the
/// strategies of a pair; a disagreement is an error. Timed-out naive runs are
/// skipped with a warning.
pub fn run_bench(
    kb: &KnowledgeBase,
    pairs: &[BenchPair],
    strategies: &[BenchStrategy],
    n: usize,
    opts: &EnumOptions,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let mut reference: Option<(BenchStrategy, ExplanationSet)> = None;
        for &s in strategies {
            let (out, wall) = match run_strategy(kb, p, n, s, opts) {
                Err(Error::Timeout(budget)) if s == BenchStrategy::Naive => {
                    log::warn!(
                        "pair {i} ({} - {}): {s} exceeded {budget:?}, row skipped",
                        kb.name(p.start),
                        kb.name(p.end)
                    );
                    continue;
                }
                other => other?,
            };
            let set = explanation_set(&out);
            match &reference {
                None => reference = Some((s, set)),
                Some((first, r)) if *r != set => {
                    return Err(Error::Config(format!(
                        "pair {i} ({} - {}): {s} found {} explanations but {first} found {}",
                        kb.name(p.start),
                        kb.name(p.end),
                        set.len(),
                        r.len()
                    )));
                }
                Some(_) => {}
            }
            rows.push(BenchRow {
                pair: format!("{}|{}", kb.name(p.start), kb.name(p.end)),
                class: p.class.to_string(),
                strategy: s.to_string(),
                wall_ms: wall.as_millis(),
                paths: out.counters.path.path_instances,
                merges: out.counters.merge_calls,
                explanations: out.explanations.len() as u64,
                duplicates: out.counters.duplicates,
            });
        }
    }
    Ok(rows)
}

/// Canonical forms of an output, for cross-strategy comparisons.
pub fn forms(out: &EnumOutput) -> BTreeSet<CanonicalForm> {
    out.explanations.iter().map(|e| canonical_labeling(&e.pattern).0).collect()
}
