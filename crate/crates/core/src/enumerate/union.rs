//! Round-based union of path explanations.
//!
//! Round `r` merges the explanations first produced in round `r - 1` (the
//! paths, for round 1) with the path pool. New results are deduplicated by
//! canonical form against everything produced so far. The pruned variant
//! keeps, for every explanation of the current round, the list of
//! `(parent, path)` merges that produced it, and in later rounds merges an
//! explanation only with paths that some sibling sharing a parent was built
//! from.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap as HashMap;

use rayon::prelude::*;

use super::merge::{merge_canonical, Merged};
use super::{Deadline, EnumCounters, EnumOptions, UnionStrategy};
use crate::error::{Error, Result};
use crate::pattern::{CanonicalForm, Explanation};

/// One merge result: `child` (an index into the output) was produced by
/// merging output `parent` with path `path`. Recorded for duplicates too.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub parent: usize,
    pub path: usize,
    pub child: usize,
    pub round: usize,
}

/// Decides which explanations of a round are expanded in the next one.
pub trait ExpansionFilter {
    /// `fresh` holds the explanations first produced in `round` (round 0 is
    /// the path pool). Returns one flag per explanation.
    fn select(&mut self, round: usize, fresh: &[Explanation]) -> Vec<bool>;
}

/// Expands everything.
pub struct ExpandAll;

impl ExpansionFilter for ExpandAll {
    fn select(&mut self, _round: usize, fresh: &[Explanation]) -> Vec<bool> {
        vec![true; fresh.len()]
    }
}

#[derive(Clone, Debug)]
pub struct UnionOutput {
    /// Paths first, then each round's new explanations in generation order.
    pub explanations: Vec<Explanation>,
    pub counters: EnumCounters,
    pub derivations: Vec<Derivation>,
}

pub fn path_union_basic(paths: &[Explanation], n: usize, opts: &EnumOptions) -> Result<UnionOutput> {
    path_union(paths, n, UnionStrategy::Basic, opts, &mut ExpandAll)
}

pub fn path_union_prune(paths: &[Explanation], n: usize, opts: &EnumOptions) -> Result<UnionOutput> {
    path_union(paths, n, UnionStrategy::Prune, opts, &mut ExpandAll)
}

pub fn path_union(
    paths: &[Explanation],
    n: usize,
    strategy: UnionStrategy,
    opts: &EnumOptions,
    filter: &mut dyn ExpansionFilter,
) -> Result<UnionOutput> {
    let deadline = Deadline::new(opts.time_budget);
    let mut counters = EnumCounters::default();
    let mut derivations = Vec::new();

    let mut all: Vec<Explanation> = Vec::with_capacity(paths.len());
    let mut seen: HashMap<CanonicalForm, usize> = HashMap::default();
    for p in paths {
        let (form, re) = p.clone().canonicalize();
        seen.insert(form, all.len());
        all.push(Explanation { level: 1, ..re });
    }
    if all.len() > opts.max_explanations {
        return Err(Error::TooManyExplanations(opts.max_explanations));
    }
    let num_paths = all.len();

    // positions in `all` of the explanations produced by the previous round
    let mut expand: Vec<usize> = (0..all.len()).collect();
    let mut history: Vec<Vec<(usize, usize)>> = vec![Vec::new(); expand.len()];
    let mut selected = filter.select(0, &all);
    let mut round = 0;

    while !expand.is_empty() {
        deadline.check()?;
        round += 1;
        counters.rounds += 1;
        let tasks = merge_tasks(strategy, round, num_paths, &selected, &history);

        let mut state = Round {
            base: all.len(),
            round,
            record: opts.record_derivations,
            keep_history: strategy == UnionStrategy::Prune,
            cap: opts.max_explanations,
            fresh: Vec::new(),
            fresh_seen: HashMap::default(),
            fresh_history: Vec::new(),
        };

        if opts.parallel {
            let pairs: Vec<(usize, usize)> = tasks
                .iter()
                .flat_map(|(i1, js)| js.iter().map(move |&j| (*i1, j)))
                .collect();
            for chunk in pairs.chunks(256) {
                deadline.check()?;
                let known = |f: &CanonicalForm| seen.contains_key(f);
                let results: Vec<(Vec<Merged>, u64)> = chunk
                    .par_iter()
                    .map(|&(i1, j)| {
                        let mut mappings = 0;
                        let merged = merge_canonical(&all[expand[i1]], &all[j], n, &mut mappings, &known);
                        (merged, mappings)
                    })
                    .collect();
                for (&(i1, j), (merged, mappings)) in chunk.iter().zip(results) {
                    counters.merge_calls += 1;
                    counters.mappings += mappings;
                    state.absorb(i1, expand[i1], j, merged, &seen, &mut counters, &mut derivations)?;
                }
            }
        } else {
            for (i1, js) in &tasks {
                deadline.check()?;
                for &j in js {
                    let merged = {
                        let known = |f: &CanonicalForm| {
                            seen.contains_key(f) || state.fresh_seen.contains_key(f)
                        };
                        merge_canonical(&all[expand[*i1]], &all[j], n, &mut counters.mappings, &known)
                    };
                    counters.merge_calls += 1;
                    state.absorb(*i1, expand[*i1], j, merged, &seen, &mut counters, &mut derivations)?;
                }
            }
        }

        let base = state.base;
        for (form, idx) in state.fresh_seen {
            seen.insert(form, base + idx);
        }
        selected = filter.select(round, &state.fresh);
        expand = (base..base + state.fresh.len()).collect();
        all.extend(state.fresh);
        history = state.fresh_history;
    }

    Ok(UnionOutput {
        explanations: all,
        counters,
        derivations,
    })
}

/// For each selected explanation of the previous round, the paths to merge
/// it with. Round 1 and the basic strategy use every path; the pruned
/// strategy uses the paths recorded by any explanation sharing a parent.
fn merge_tasks(
    strategy: UnionStrategy,
    round: usize,
    num_paths: usize,
    selected: &[bool],
    history: &[Vec<(usize, usize)>],
) -> Vec<(usize, Vec<usize>)> {
    let every_path = strategy == UnionStrategy::Basic || round == 1;
    let mut by_parent: HashMap<usize, BTreeSet<usize>> = HashMap::default();
    if !every_path {
        for h in history {
            for &(x, j) in h {
                by_parent.entry(x).or_default().insert(j);
            }
        }
    }
    (0..selected.len())
        .filter(|&i1| selected[i1])
        .map(|i1| {
            if every_path {
                return (i1, (0..num_paths).collect());
            }
            let mut s = BTreeSet::new();
            for (x, _) in &history[i1] {
                if let Some(js) = by_parent.get(x) {
                    s.extend(js.iter().copied());
                }
            }
            (i1, s.into_iter().collect())
        })
        .collect()
}

/// Output of the round in progress.
struct Round {
    base: usize,
    round: usize,
    record: bool,
    keep_history: bool,
    cap: usize,
    fresh: Vec<Explanation>,
    fresh_seen: HashMap<CanonicalForm, usize>,
    fresh_history: Vec<Vec<(usize, usize)>>,
}

impl Round {
    /// Deduplicates the results of merging previous-round explanation `i1`
    /// (output position `parent`) with path `j`.
    #[allow(clippy::too_many_arguments)]
    fn absorb(
        &mut self,
        i1: usize,
        parent: usize,
        j: usize,
        merged: Vec<Merged>,
        seen: &HashMap<CanonicalForm, usize>,
        counters: &mut EnumCounters,
        derivations: &mut Vec<Derivation>,
    ) -> Result<()> {
        for Merged { form, explanation } in merged {
            if let Some(&existing) = seen.get(&form) {
                counters.duplicates += 1;
                if self.record {
                    derivations.push(Derivation {
                        parent,
                        path: j,
                        child: existing,
                        round: self.round,
                    });
                }
                continue;
            }
            let idx = match self.fresh_seen.get(&form) {
                Some(&idx) => {
                    counters.duplicates += 1;
                    idx
                }
                None => {
                    let mut re = explanation.expect("merge skipped the join for an unknown form");
                    re.level = self.round + 1;
                    self.fresh_seen.insert(form, self.fresh.len());
                    self.fresh.push(re);
                    self.fresh_history.push(Vec::new());
                    if self.base + self.fresh.len() > self.cap {
                        return Err(Error::TooManyExplanations(self.cap));
                    }
                    self.fresh.len() - 1
                }
            };
            if self.keep_history {
                self.fresh_history[idx].push((i1, j));
            }
            if self.record {
                derivations.push(Derivation {
                    parent,
                    path: j,
                    child: self.base + idx,
                    round: self.round,
                });
            }
        }
        Ok(())
    }
}
