use std::collections::BTreeMap;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Aggregate;
use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase};
use crate::pattern::{for_each_match, ExplanationPattern, Var};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DistributionKind {
    Local,
    Global,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMeta {
    pub sample_size: usize,
    pub seed: u64,
}

/// Histogram of an aggregate over target pairs: `(value, number of pairs)`
/// sorted by value. Pairs without any instance are left out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub entries: Vec<(u64, u64)>,
    pub kind: DistributionKind,
    pub sample: Option<SampleMeta>,
}

impl Distribution {
    fn from_values(values: impl IntoIterator<Item = u64>, kind: DistributionKind) -> Self {
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        for v in values {
            *hist.entry(v).or_default() += 1;
        }
        Distribution {
            entries: hist.into_iter().collect(),
            kind,
            sample: None,
        }
    }

    /// Total number of pairs.
    pub fn pairs(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c).sum()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({a}, {c})")?;
        }
        f.write_str("}")
    }
}

/// Aggregate value of `p` for every end entity reachable from `start`,
/// from a single traversal with only the start variable bound.
pub fn local_values(kb: &KnowledgeBase, p: &ExplanationPattern, start: EntityId, agg: Aggregate) -> HashMap<EntityId, u64> {
    match agg {
        Aggregate::Count => {
            let mut counts: HashMap<EntityId, u64> = HashMap::default();
            let _ = for_each_match(kb, p, start, None, &mut |b| {
                *counts.entry(b[Var::END.index()]).or_default() += 1;
                ControlFlow::Continue(())
            });
            counts
        }
        Aggregate::Monocount => {
            let mut seen: HashMap<EntityId, Vec<HashSet<EntityId>>> = HashMap::default();
            let _ = for_each_match(kb, p, start, None, &mut |b| {
                let sets = seen
                    .entry(b[Var::END.index()])
                    .or_insert_with(|| vec![HashSet::default(); b.len()]);
                for (v, &x) in b.iter().enumerate().skip(2) {
                    sets[v].insert(x);
                }
                ControlFlow::Continue(())
            });
            seen.into_iter()
                .map(|(y, sets)| {
                    let m = sets[2..].iter().map(|s| s.len() as u64).min().unwrap_or(1);
                    (y, m)
                })
                .collect()
        }
    }
}

/// Distribution obtained by varying only the end entity.
pub fn local_distribution(
    kb: &KnowledgeBase,
    p: &ExplanationPattern,
    start: EntityId,
    agg: Aggregate,
) -> Result<Distribution> {
    kb.check(start)?;
    Ok(Distribution::from_values(
        local_values(kb, p, start, agg).into_values(),
        DistributionKind::Local,
    ))
}

/// `sample_size` distinct start entities drawn with a seeded generator,
/// returned in ascending id order.
pub fn sample_starts(kb: &KnowledgeBase, sample_size: usize, seed: u64) -> Result<Vec<EntityId>> {
    if sample_size == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let all: Vec<EntityId> = kb.entity_ids().collect();
    let take = if sample_size > all.len() {
        log::warn!(
            "sample size {sample_size} exceeds the {} entities of the knowledge base; using all of them",
            all.len()
        );
        all.len()
    } else {
        sample_size
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<EntityId> = all.choose_multiple(&mut rng, take).copied().collect();
    starts.sort();
    Ok(starts)
}

/// Merge of the local distributions of sampled start entities.
pub fn global_distribution(
    kb: &KnowledgeBase,
    p: &ExplanationPattern,
    agg: Aggregate,
    sample_size: usize,
    seed: u64,
) -> Result<Distribution> {
    let starts = sample_starts(kb, sample_size, seed)?;
    let partial: Vec<Vec<u64>> = starts
        .par_iter()
        .map(|&s| local_values(kb, p, s, agg).into_values().collect())
        .collect();
    let mut d = Distribution::from_values(partial.into_iter().flatten(), DistributionKind::Global);
    d.sample = Some(SampleMeta { sample_size, seed });
    Ok(d)
}

/// Number of pairs whose aggregate strictly exceeds `a`.
pub fn m_position_raw(a: u64, d: &Distribution) -> u64 {
    d.entries.iter().filter(|&&(v, _)| v > a).map(|&(_, c)| c).sum()
}

/// Streams the matches from each of `starts` and counts pairs whose
/// aggregate exceeds `a`. Returns `None` as soon as the count goes above
/// `limit`. Aggregates only grow while matches are streamed, so a pair is
/// counted the moment it first exceeds `a`.
pub fn position_limited(
    kb: &KnowledgeBase,
    p: &ExplanationPattern,
    starts: &[EntityId],
    agg: Aggregate,
    a: u64,
    limit: Option<u64>,
) -> Option<u64> {
    let mut better = 0u64;
    let over = |better: u64| limit.is_some_and(|l| better > l);
    for &s in starts {
        let flow = match agg {
            Aggregate::Count => {
                let mut counts: HashMap<EntityId, u64> = HashMap::default();
                for_each_match(kb, p, s, None, &mut |b| {
                    let c = counts.entry(b[Var::END.index()]).or_default();
                    *c += 1;
                    if *c == a + 1 {
                        better += 1;
                        if over(better) {
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                })
            }
            Aggregate::Monocount => {
                let non_targets = p.num_vars() - 2;
                if non_targets == 0 {
                    // monocount is 1 for every pair with a direct edge
                    if a == 0 {
                        let mut ends = HashSet::default();
                        let _ = for_each_match(kb, p, s, None, &mut |b| {
                            ends.insert(b[Var::END.index()]);
                            ControlFlow::Continue(())
                        });
                        better += ends.len() as u64;
                    }
                    if over(better) {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                } else {
                    let mut seen: HashMap<EntityId, (Vec<HashSet<EntityId>>, bool)> = HashMap::default();
                    for_each_match(kb, p, s, None, &mut |b| {
                        let (sets, counted) = seen
                            .entry(b[Var::END.index()])
                            .or_insert_with(|| (vec![HashSet::default(); b.len()], false));
                        for (v, &x) in b.iter().enumerate().skip(2) {
                            sets[v].insert(x);
                        }
                        if !*counted && sets[2..].iter().all(|s| s.len() as u64 > a) {
                            *counted = true;
                            better += 1;
                            if over(better) {
                                return ControlFlow::Break(());
                            }
                        }
                        ControlFlow::Continue(())
                    })
                }
            }
        };
        if flow.is_break() {
            return None;
        }
    }
    Some(better)
}
