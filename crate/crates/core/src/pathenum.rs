//! Simple path explanations between two targets, up to a length limit.
//!
//! Three interchangeable strategies produce the same explanation set:
//! a depth-first walk from the start entity, a bidirectional breadth-first
//! expansion that joins half paths at a meeting node, and a bidirectional
//! expansion scheduled by degree-normalized activation scores.
//!
//! The bidirectional strategies grow start-side partial paths up to
//! `ceil(max_len / 2)` edges and end-side ones up to `floor(max_len / 2)`.
//! A full path of length `L` is reported only for the split where the
//! start half has `min(L, ceil(max_len / 2))` edges, so each path is joined
//! exactly once.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap as HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kb::{Edge, EntityId, KnowledgeBase};
use crate::pattern::{instances_to_pattern, Explanation, ExplanationInstance, ExplanationPattern};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum PathStrategy {
    Naive,
    Basic,
    #[default]
    Prioritized,
}

impl PathStrategy {
    pub const ALL: [PathStrategy; 3] = [PathStrategy::Naive, PathStrategy::Basic, PathStrategy::Prioritized];
}

impl fmt::Display for PathStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathStrategy::Naive => "naive",
            PathStrategy::Basic => "basic",
            PathStrategy::Prioritized => "prioritized",
        })
    }
}

impl FromStr for PathStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(PathStrategy::Naive),
            "basic" => Ok(PathStrategy::Basic),
            "prioritized" => Ok(PathStrategy::Prioritized),
            other => Err(Error::Config(format!("unknown path strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathCounters {
    pub nodes_expanded: u64,
    pub partial_paths: u64,
    pub joins_tested: u64,
    pub path_instances: u64,
    /// Longest partial path materialized on either side.
    pub longest_partial: usize,
}

#[derive(Clone, Debug)]
pub struct PathEnumOutput {
    /// One level-1 explanation per path pattern, in canonical variable order,
    /// sorted by path length and then canonical form.
    pub explanations: Vec<Explanation>,
    pub counters: PathCounters,
}

pub fn path_enum(
    kb: &KnowledgeBase,
    start: EntityId,
    end: EntityId,
    max_len: usize,
    strategy: PathStrategy,
) -> Result<PathEnumOutput> {
    match strategy {
        PathStrategy::Naive => path_enum_naive(kb, start, end, max_len),
        PathStrategy::Basic => path_enum_basic(kb, start, end, max_len),
        PathStrategy::Prioritized => path_enum_prioritized(kb, start, end, max_len),
    }
}

fn check_pair(kb: &KnowledgeBase, start: EntityId, end: EntityId) -> Result<()> {
    kb.check(start)?;
    kb.check(end)?;
    if start == end {
        return Err(Error::Config("start and end must be distinct entities".into()));
    }
    Ok(())
}

/// Groups path instances by pattern and emits canonical explanations.
fn group_paths(start: EntityId, paths: Vec<Vec<Edge>>, mut counters: PathCounters) -> Result<PathEnumOutput> {
    counters.path_instances = paths.len() as u64;
    let mut groups: HashMap<ExplanationPattern, Vec<ExplanationInstance>> = HashMap::default();
    for path in paths {
        let (pattern, instance) = instances_to_pattern(start, &path)?;
        groups.entry(pattern).or_default().push(instance);
    }
    let mut explanations: Vec<_> = groups
        .into_iter()
        .map(|(pattern, instances)| {
            Explanation {
                pattern,
                instances,
                level: 1,
            }
            .canonicalize()
        })
        .collect();
    explanations.sort_by(|(fa, a), (fb, b)| {
        a.pattern
            .edges()
            .len()
            .cmp(&b.pattern.edges().len())
            .then_with(|| fa.cmp(fb))
    });
    Ok(PathEnumOutput {
        explanations: explanations.into_iter().map(|(_, e)| e).collect(),
        counters,
    })
}

/// Depth-first enumeration of every path from `start`, keeping those that reach `end`.
pub fn path_enum_naive(kb: &KnowledgeBase, start: EntityId, end: EntityId, max_len: usize) -> Result<PathEnumOutput> {
    check_pair(kb, start, end)?;
    let mut counters = PathCounters::default();
    let mut found = Vec::new();
    let mut on_path = vec![false; kb.num_entities()];
    on_path[start.index()] = true;
    let mut edges = Vec::new();
    naive_walk(kb, start, end, max_len, &mut on_path, &mut edges, &mut found, &mut counters);
    group_paths(start, found, counters)
}

#[allow(clippy::too_many_arguments)]
fn naive_walk(
    kb: &KnowledgeBase,
    at: EntityId,
    end: EntityId,
    budget: usize,
    on_path: &mut [bool],
    edges: &mut Vec<Edge>,
    found: &mut Vec<Vec<Edge>>,
    counters: &mut PathCounters,
) {
    if budget == 0 {
        return;
    }
    counters.nodes_expanded += 1;
    for inc in kb.incident(at) {
        let next = inc.other;
        if on_path[next.index()] {
            continue;
        }
        edges.push(inc.edge);
        counters.partial_paths += 1;
        counters.longest_partial = counters.longest_partial.max(edges.len());
        if next == end {
            found.push(edges.clone());
        } else {
            on_path[next.index()] = true;
            naive_walk(kb, next, end, budget - 1, on_path, edges, found, counters);
            on_path[next.index()] = false;
        }
        edges.pop();
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Side {
    Start = 0,
    End = 1,
}

/// A partial path grown from one target; `nodes[0]` is the target.
#[derive(Clone, Debug)]
struct PartialPath {
    nodes: Vec<EntityId>,
    edges: Vec<Edge>,
}

impl PartialPath {
    fn len(&self) -> usize {
        self.edges.len()
    }

    fn last(&self) -> EntityId {
        *self.nodes.last().unwrap()
    }
}

/// Shared state of the two bidirectional strategies: stored partial paths
/// per meeting node and the join rule.
struct Bidirectional<'a> {
    kb: &'a KnowledgeBase,
    start: EntityId,
    end: EntityId,
    budget: [usize; 2],
    paths: [Vec<PartialPath>; 2],
    // meeting node -> start partials of full budget length
    start_full: HashMap<EntityId, Vec<usize>>,
    // meeting node -> end partials of any length
    end_at: HashMap<EntityId, Vec<usize>>,
    found: Vec<Vec<Edge>>,
    counters: PathCounters,
}

impl<'a> Bidirectional<'a> {
    fn new(kb: &'a KnowledgeBase, start: EntityId, end: EntityId, max_len: usize) -> Self {
        let mut this = Bidirectional {
            kb,
            start,
            end,
            budget: [max_len.div_ceil(2), max_len / 2],
            paths: [Vec::new(), Vec::new()],
            start_full: HashMap::default(),
            end_at: HashMap::default(),
            found: Vec::new(),
            counters: PathCounters::default(),
        };
        this.add(
            Side::Start,
            PartialPath {
                nodes: vec![start],
                edges: vec![],
            },
        );
        this.add(
            Side::End,
            PartialPath {
                nodes: vec![end],
                edges: vec![],
            },
        );
        this
    }

    /// True if the partial path may be extended further.
    fn expandable(&self, side: Side, p: &PartialPath) -> bool {
        p.len() < self.budget[side as usize] && !(side == Side::Start && p.last() == self.end)
    }

    /// Stores a new partial path, joins it with compatible opposite halves,
    /// and returns its index.
    fn add(&mut self, side: Side, p: PartialPath) -> usize {
        self.counters.partial_paths += 1;
        self.counters.longest_partial = self.counters.longest_partial.max(p.len());
        let m = p.last();
        let idx = self.paths[side as usize].len();
        match side {
            Side::Start => {
                if p.len() == self.budget[0] {
                    let others = self.end_at.get(&m).cloned().unwrap_or_default();
                    for q in others {
                        self.try_join(&p, q);
                    }
                    self.start_full.entry(m).or_default().push(idx);
                } else if m == self.end {
                    // only the zero-length end half qualifies
                    self.try_join(&p, 0);
                }
            }
            Side::End => {
                if p.len() > 0 {
                    let others = self.start_full.get(&m).cloned().unwrap_or_default();
                    for s in others {
                        let sp = self.paths[0][s].clone();
                        self.join(&sp, &p);
                    }
                }
                self.end_at.entry(m).or_default().push(idx);
            }
        }
        self.paths[side as usize].push(p);
        idx
    }

    fn try_join(&mut self, start_half: &PartialPath, end_idx: usize) {
        let q = self.paths[1][end_idx].clone();
        self.join(start_half, &q);
    }

    fn join(&mut self, s: &PartialPath, e: &PartialPath) {
        self.counters.joins_tested += 1;
        let meet = s.last();
        debug_assert_eq!(meet, e.last());
        let overlap = e.nodes[..e.nodes.len() - 1].iter().any(|x| s.nodes.contains(x));
        if overlap {
            return;
        }
        let mut edges = s.edges.clone();
        edges.extend(e.edges.iter().rev().copied());
        self.found.push(edges);
    }

    /// One-edge extensions of `p` on `side`.
    fn extensions(&self, side: Side, p: &PartialPath) -> Vec<PartialPath> {
        let at = p.last();
        self.kb
            .incident(at)
            .iter()
            .filter(|inc| !p.nodes.contains(&inc.other))
            .filter(|inc| side == Side::Start || inc.other != self.start)
            .map(|inc| {
                let mut nodes = p.nodes.clone();
                nodes.push(inc.other);
                let mut edges = p.edges.clone();
                edges.push(inc.edge);
                PartialPath { nodes, edges }
            })
            .collect()
    }
}

/// Bidirectional breadth-first enumeration, shorter partial paths first.
pub fn path_enum_basic(kb: &KnowledgeBase, start: EntityId, end: EntityId, max_len: usize) -> Result<PathEnumOutput> {
    check_pair(kb, start, end)?;
    let mut state = Bidirectional::new(kb, start, end, max_len);
    let mut frontier: [Vec<usize>; 2] = [vec![0], vec![0]];
    let rounds = state.budget[0].max(state.budget[1]);
    for _ in 0..rounds {
        for side in [Side::Start, Side::End] {
            let s = side as usize;
            let current = std::mem::take(&mut frontier[s]);
            for idx in current {
                let p = state.paths[s][idx].clone();
                if !state.expandable(side, &p) {
                    continue;
                }
                state.counters.nodes_expanded += 1;
                for ext in state.extensions(side, &p) {
                    let i = state.add(side, ext);
                    frontier[s].push(i);
                }
            }
        }
    }
    let Bidirectional { found, counters, .. } = state;
    group_paths(start, found, counters)
}

#[derive(Copy, Clone, Debug, PartialEq)]
struct Priority(f64);

impl Eq for Priority {}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Bidirectional enumeration that repeatedly expands the node with the
/// largest combined activation among nodes holding unexpanded partial paths.
pub fn path_enum_prioritized(
    kb: &KnowledgeBase,
    start: EntityId,
    end: EntityId,
    max_len: usize,
) -> Result<PathEnumOutput> {
    check_pair(kb, start, end)?;
    let mut state = Bidirectional::new(kb, start, end, max_len);
    let mut activation: HashMap<EntityId, [f64; 2]> = HashMap::default();
    let inv_degree = |v: EntityId| {
        let d = kb.incident(v).len();
        if d == 0 {
            0.0
        } else {
            1.0 / d as f64
        }
    };
    activation.insert(start, [inv_degree(start), 0.0]);
    activation.insert(end, [0.0, inv_degree(end)]);
    let mut pending: HashMap<EntityId, [Vec<usize>; 2]> = HashMap::default();
    for (side, target) in [(Side::Start, start), (Side::End, end)] {
        if state.expandable(side, &state.paths[side as usize][0]) {
            pending.entry(target).or_default()[side as usize].push(0);
        }
    }

    let total = |act: &HashMap<EntityId, [f64; 2]>, v: EntityId| act.get(&v).map_or(0.0, |a| a[0] + a[1]);
    let mut heap: BinaryHeap<(Priority, Reverse<EntityId>)> = BinaryHeap::new();
    heap.push((Priority(total(&activation, start)), Reverse(start)));
    heap.push((Priority(total(&activation, end)), Reverse(end)));

    while let Some((Priority(score), Reverse(node))) = heap.pop() {
        let has_pending = pending
            .get(&node)
            .is_some_and(|p| !p[0].is_empty() || !p[1].is_empty());
        if !has_pending || score != total(&activation, node) {
            continue;
        }
        state.counters.nodes_expanded += 1;
        let queued = pending.remove(&node).unwrap_or_default();
        let mut touched: Vec<EntityId> = Vec::new();
        for side in [Side::Start, Side::End] {
            let s = side as usize;
            if queued[s].is_empty() {
                continue;
            }
            for &idx in &queued[s] {
                let p = state.paths[s][idx].clone();
                for ext in state.extensions(side, &p) {
                    let at = ext.last();
                    let keep = state.expandable(side, &ext);
                    let i = state.add(side, ext);
                    if keep {
                        pending.entry(at).or_default()[s].push(i);
                        touched.push(at);
                    }
                }
            }
            // spread this side's activation to non-target neighbors
            let source = activation.get(&node).map_or(0.0, |a| a[s]);
            let mut neighbors: Vec<EntityId> = kb
                .incident(node)
                .iter()
                .map(|inc| inc.other)
                .filter(|&x| x != start && x != end)
                .collect();
            neighbors.sort();
            neighbors.dedup();
            for x in neighbors {
                activation.entry(x).or_insert([0.0, 0.0])[s] += source * inv_degree(x);
                touched.push(x);
            }
            activation.entry(node).or_insert([0.0, 0.0])[s] = 0.0;
        }
        touched.push(node);
        touched.sort();
        touched.dedup();
        for v in touched {
            if pending.get(&v).is_some_and(|p| !p[0].is_empty() || !p[1].is_empty()) {
                heap.push((Priority(total(&activation, v)), Reverse(v)));
            }
        }
    }
    let Bidirectional { found, counters, .. } = state;
    group_paths(start, found, counters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Var;

    fn tg1() -> KnowledgeBase {
        KnowledgeBase::parse(crate::kb::tests::TG1).unwrap()
    }

    #[test]
    fn naive_on_tg1() {
        let kb = tg1();
        let (a, b) = (kb.resolve("A").unwrap(), kb.resolve("B").unwrap());
        let out = path_enum_naive(&kb, a, b, 4).unwrap();
        let total: usize = out.explanations.iter().map(|e| e.count()).sum();
        assert_eq!(total, 4);
        assert_eq!(out.counters.path_instances, 4);
        let wedge = out
            .explanations
            .iter()
            .find(|e| e.pattern.num_vars() == 3)
            .unwrap();
        let movies: Vec<&str> = wedge.instances.iter().map(|i| kb.name(i.get(Var(2)))).collect();
        assert_eq!(movies, ["M1", "M2"]);
        assert!(out.explanations.iter().all(|e| e.level == 1 && e.pattern.is_path()));

        let out = path_enum_naive(&kb, a, b, 1).unwrap();
        assert_eq!(out.explanations.len(), 1);
        assert_eq!(out.explanations[0].count(), 1);
    }

    #[test]
    fn strategies_agree_on_tg1() {
        let kb = tg1();
        for (s, e) in [("A", "B"), ("B", "A"), ("A", "C"), ("M1", "M3"), ("C", "B")] {
            let (s, e) = (kb.resolve(s).unwrap(), kb.resolve(e).unwrap());
            for len in 1..=5 {
                let naive = path_enum_naive(&kb, s, e, len).unwrap();
                let basic = path_enum_basic(&kb, s, e, len).unwrap();
                let prio = path_enum_prioritized(&kb, s, e, len).unwrap();
                assert_eq!(naive.explanations, basic.explanations, "basic len {len}");
                assert_eq!(naive.explanations, prio.explanations, "prioritized len {len}");
            }
        }
    }

    #[test]
    fn single_edge_and_disconnected() {
        let kb = KnowledgeBase::parse("a\tx\tb\tU\nc\ty\td\tD\n").unwrap();
        let id = |n: &str| kb.resolve(n).unwrap();
        for strategy in PathStrategy::ALL {
            let out = path_enum(&kb, id("a"), id("b"), 4, strategy).unwrap();
            assert_eq!(out.explanations.len(), 1);
            let out = path_enum(&kb, id("a"), id("d"), 4, strategy).unwrap();
            assert!(out.explanations.is_empty());
        }
    }

    #[test]
    fn basic_respects_half_budget() {
        let kb = tg1();
        let (a, b) = (kb.resolve("A").unwrap(), kb.resolve("B").unwrap());
        for len in 1..=6 {
            let out = path_enum_basic(&kb, a, b, len).unwrap();
            assert!(out.counters.longest_partial <= len.div_ceil(2));
            let out = path_enum_prioritized(&kb, a, b, len).unwrap();
            assert!(out.counters.longest_partial <= len.div_ceil(2));
        }
    }

    #[test]
    fn odd_lengths_are_complete() {
        // a 3-edge chain is only found with the ceil split
        let kb = KnowledgeBase::parse("s\tr\tx\tD\nx\tr\ty\tD\ny\tr\tt\tD\n").unwrap();
        let (s, t) = (kb.resolve("s").unwrap(), kb.resolve("t").unwrap());
        for strategy in PathStrategy::ALL {
            assert_eq!(path_enum(&kb, s, t, 3, strategy).unwrap().counters.path_instances, 1);
            assert_eq!(path_enum(&kb, s, t, 2, strategy).unwrap().counters.path_instances, 0);
        }
    }

    #[test]
    fn instance_totals_match_connectedness() {
        let kb = tg1();
        let ids: Vec<EntityId> = kb.entity_ids().collect();
        for &s in &ids {
            for &e in &ids {
                if s == e {
                    continue;
                }
                for len in 1..=4 {
                    let out = path_enum_prioritized(&kb, s, e, len).unwrap();
                    assert_eq!(out.counters.path_instances, kb.connectedness(s, e, len).unwrap());
                }
            }
        }
    }

    #[test]
    fn rejects_bad_pairs() {
        let kb = tg1();
        let a = kb.resolve("A").unwrap();
        assert!(path_enum_naive(&kb, a, a, 3).is_err());
        assert!(path_enum_basic(&kb, a, EntityId(100), 3).is_err());
    }
}
