//! Explanation patterns, their instances, and the structural checks that
//! define minimality (essential and non-decomposable).
//!
//! Variables are numbered densely. `Var::START` (0) and `Var::END` (1) are
//! the two target variables; every other variable is a non-target.

mod canon;
mod matcher;

use std::collections::HashSet;
use std::fmt;

use itertools::Itertools;

pub use canon::{canonical_form, CanonicalForm, DEFAULT_MAX_VARS};
pub(crate) use canon::canonical_labeling;
pub use matcher::match_instances;
pub(crate) use matcher::for_each_match;

use crate::error::{Error, Result};
use crate::kb::{Edge, EntityId, KnowledgeBase, LabelId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u8);

impl Var {
    pub const START: Var = Var(0);
    pub const END: Var = Var(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_target(self) -> bool {
        self.0 < 2
    }

    /// Display name: `start`, `end`, then `v0`, `v1`, ... for non-targets.
    pub fn name(self) -> String {
        match self.0 {
            0 => "start".to_string(),
            1 => "end".to_string(),
            i => format!("v{}", i - 2),
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "start" => Some(Var::START),
            "end" => Some(Var::END),
            _ => {
                let i: u8 = name.strip_prefix('v')?.parse().ok()?;
                i.checked_add(2).map(Var)
            }
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A labeled pattern edge. Undirected edges keep `from < to`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternEdge {
    pub from: Var,
    pub to: Var,
    pub label: LabelId,
    pub directed: bool,
}

impl PatternEdge {
    pub fn new(from: Var, to: Var, label: LabelId, directed: bool) -> Self {
        if !directed && to < from {
            PatternEdge {
                from: to,
                to: from,
                label,
                directed,
            }
        } else {
            PatternEdge {
                from,
                to,
                label,
                directed,
            }
        }
    }

    pub fn directed(from: Var, to: Var, label: LabelId) -> Self {
        Self::new(from, to, label, true)
    }

    pub fn undirected(a: Var, b: Var, label: LabelId) -> Self {
        Self::new(a, b, label, false)
    }

    pub fn touches(&self, v: Var) -> bool {
        self.from == v || self.to == v
    }

    pub fn other(&self, v: Var) -> Var {
        if self.from == v {
            self.to
        } else {
            self.from
        }
    }

    /// Applies a variable renaming, re-normalizing undirected edges.
    pub(crate) fn renamed(&self, map: impl Fn(Var) -> Var) -> Self {
        Self::new(map(self.from), map(self.to), self.label, self.directed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExplanationPattern {
    num_vars: u8,
    edges: Vec<PatternEdge>,
}

impl ExplanationPattern {
    /// Builds a pattern, merging exact duplicate edges. Rejects out-of-range
    /// endpoints, self-loops and disconnected variable sets.
    pub fn new(num_vars: usize, edges: Vec<PatternEdge>) -> Result<Self> {
        let p = Self::candidate(num_vars, edges)?;
        if !p.is_connected() {
            return Err(Error::InvalidPattern("pattern graph is not connected".into()));
        }
        Ok(p)
    }

    /// Like [`ExplanationPattern::new`] but without the connectivity check, for
    /// arbitrary candidate graphs.
    pub fn candidate(num_vars: usize, edges: Vec<PatternEdge>) -> Result<Self> {
        if num_vars < 2 {
            return Err(Error::InvalidPattern(
                "a pattern needs distinct start and end variables".into(),
            ));
        }
        if num_vars > u8::MAX as usize {
            return Err(Error::InvalidPattern(format!("{num_vars} variables")));
        }
        for e in &edges {
            if e.from.index() >= num_vars || e.to.index() >= num_vars {
                return Err(Error::InvalidPattern(format!(
                    "edge {}-{} references an undeclared variable",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::InvalidPattern(format!("self-loop on {}", e.from)));
            }
        }
        Ok(Self::from_parts(num_vars as u8, edges))
    }

    pub(crate) fn from_parts(num_vars: u8, edges: Vec<PatternEdge>) -> Self {
        let mut edges: Vec<PatternEdge> = edges
            .into_iter()
            .map(|e| PatternEdge::new(e.from, e.to, e.label, e.directed))
            .collect();
        edges.sort();
        edges.dedup();
        ExplanationPattern { num_vars, edges }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    pub fn edges(&self) -> &[PatternEdge] {
        &self.edges
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.num_vars).map(Var)
    }

    pub fn non_targets(&self) -> impl Iterator<Item = Var> {
        (2..self.num_vars).map(Var)
    }

    /// A path pattern: the edges form one simple path from start to end.
    pub fn is_path(&self) -> bool {
        if self.edges.len() + 1 != self.num_vars() {
            return false;
        }
        let mut degree = vec![0usize; self.num_vars()];
        for e in &self.edges {
            degree[e.from.index()] += 1;
            degree[e.to.index()] += 1;
        }
        degree[0] == 1
            && degree[1] == 1
            && degree[2..].iter().all(|&d| d == 2)
            && self.is_connected()
    }

    pub(crate) fn is_connected(&self) -> bool {
        let n = self.num_vars();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                if e.touches(Var(v as u8)) {
                    let o = e.other(Var(v as u8)).index();
                    if !seen[o] {
                        seen[o] = true;
                        stack.push(o);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Every simple start-to-end path, as (edge mask, node mask) bitsets.
    /// Edges are traversed ignoring direction; parallel edges yield distinct paths.
    pub(crate) fn simple_paths(&self) -> Vec<(u64, u64)> {
        assert!(self.edges.len() <= 64 && self.num_vars() <= 64);
        let mut out = Vec::new();
        self.extend_paths(Var::START, 1u64, 0u64, &mut out);
        out
    }

    fn extend_paths(&self, at: Var, nodes: u64, edges: u64, out: &mut Vec<(u64, u64)>) {
        for (i, e) in self.edges.iter().enumerate() {
            if !e.touches(at) {
                continue;
            }
            let next = e.other(at);
            if nodes & (1 << next.0) != 0 {
                continue;
            }
            let (nodes, edges) = (nodes | (1 << next.0), edges | (1 << i));
            if next == Var::END {
                out.push((edges, nodes));
            } else {
                self.extend_paths(next, nodes, edges, out);
            }
        }
    }

    pub fn is_essential(&self) -> bool {
        let (mut edges, mut nodes) = (0u64, 0u64);
        for (e, n) in self.simple_paths() {
            edges |= e;
            nodes |= n;
        }
        let all_edges = if self.edges.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.edges.len()) - 1
        };
        let all_nodes = (1u64 << self.num_vars()) - 1;
        edges == all_edges && nodes == all_nodes
    }

    pub fn is_decomposable(&self) -> bool {
        if self.edges.len() < 2 {
            return false;
        }
        // union edges that share a non-target endpoint
        let mut parent: Vec<usize> = (0..self.edges.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for v in self.non_targets() {
            let touching: Vec<usize> = (0..self.edges.len())
                .filter(|&i| self.edges[i].touches(v))
                .collect();
            for w in touching.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (1..self.edges.len()).any(|i| find(&mut parent, i) != root)
    }

    pub fn is_minimal(&self) -> bool {
        self.is_essential() && !self.is_decomposable()
    }

    /// Smallest number of simple start-to-end paths covering every node and
    /// edge, or `None` if the pattern is not essential.
    pub fn min_cover_size(&self) -> Option<usize> {
        let paths = self.simple_paths();
        let all_edges = (1u64 << self.edges.len()) - 1;
        let all_nodes = (1u64 << self.num_vars()) - 1;
        for k in 1..=paths.len() {
            for combo in paths.iter().combinations(k) {
                let (e, n) = combo
                    .iter()
                    .fold((0u64, 0u64), |(e, n), (pe, pn)| (e | pe, n | pn));
                if e == all_edges && n == all_nodes {
                    return Some(k);
                }
            }
        }
        None
    }

    /// Applies a variable permutation given as `perm[old] = new`.
    pub(crate) fn permuted(&self, perm: &[u8]) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| e.renamed(|v| Var(perm[v.index()])))
            .collect();
        Self::from_parts(self.num_vars, edges)
    }

    /// Renders the pattern with label names, e.g. `start -[starring]-> v0 <-[starring]- end`.
    pub fn describe(&self, kb: &KnowledgeBase) -> String {
        self.edges
            .iter()
            .map(|e| {
                let label = kb.label_name(e.label);
                if e.directed {
                    format!("{} -[{}]-> {}", e.from, label, e.to)
                } else {
                    format!("{} -[{}]- {}", e.from, label, e.to)
                }
            })
            .join(", ")
    }
}

/// A binding of every pattern variable to an entity, indexed by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExplanationInstance {
    binding: Box<[EntityId]>,
}

impl ExplanationInstance {
    pub fn new(binding: impl Into<Box<[EntityId]>>) -> Self {
        ExplanationInstance {
            binding: binding.into(),
        }
    }

    pub fn binding(&self) -> &[EntityId] {
        &self.binding
    }

    pub fn get(&self, v: Var) -> EntityId {
        self.binding[v.index()]
    }

    pub(crate) fn permuted(&self, perm: &[u8]) -> Self {
        let mut out = self.binding.clone();
        for (old, &e) in self.binding.iter().enumerate() {
            out[perm[old] as usize] = e;
        }
        ExplanationInstance { binding: out }
    }

    /// Checks the instance invariants: targets bound to `start`/`end`,
    /// injective, and every pattern edge present in the KB.
    pub fn satisfies(
        &self,
        kb: &KnowledgeBase,
        p: &ExplanationPattern,
        start: EntityId,
        end: EntityId,
    ) -> bool {
        if self.binding.len() != p.num_vars() || self.get(Var::START) != start || self.get(Var::END) != end {
            return false;
        }
        let distinct: HashSet<EntityId> = self.binding.iter().copied().collect();
        if distinct.len() != self.binding.len() {
            return false;
        }
        p.edges()
            .iter()
            .all(|e| kb.has_edge(self.get(e.from), self.get(e.to), e.label, e.directed))
    }
}

/// A pattern with its complete instance set for one target pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Explanation {
    pub pattern: ExplanationPattern,
    pub instances: Vec<ExplanationInstance>,
    /// Cardinality of the covering path set realized during enumeration; 1 for paths.
    pub level: usize,
}

impl Explanation {
    /// Relabels the explanation into canonical variable order and sorts its instances.
    pub fn canonicalize(self) -> (CanonicalForm, Explanation) {
        let (form, perm) = canonical_labeling(&self.pattern);
        let pattern = self.pattern.permuted(&perm);
        let mut instances: Vec<ExplanationInstance> =
            self.instances.iter().map(|i| i.permuted(&perm)).collect();
        instances.sort();
        instances.dedup();
        (
            form,
            Explanation {
                pattern,
                instances,
                level: self.level,
            },
        )
    }

    pub fn count(&self) -> usize {
        self.instances.len()
    }
}

/// Turns a simple path instance, given as KB edges walked from `start`, into
/// its path pattern and the corresponding binding. Interior nodes become
/// variables in traversal order.
pub fn instances_to_pattern(
    start: EntityId,
    path: &[Edge],
) -> Result<(ExplanationPattern, ExplanationInstance)> {
    if path.is_empty() {
        return Err(Error::InvalidPath("empty path".into()));
    }
    let mut nodes = vec![start];
    for e in path {
        let at = *nodes.last().unwrap();
        if e.src != at && e.dst != at {
            return Err(Error::InvalidPath(format!(
                "edge {:?} does not continue from entity #{}",
                e, at.0
            )));
        }
        let next = e.other(at);
        if nodes.contains(&next) {
            return Err(Error::InvalidPath(format!("entity #{} repeats", next.0)));
        }
        nodes.push(next);
    }
    let len = path.len();
    let var_at = |i: usize| -> Var {
        if i == 0 {
            Var::START
        } else if i == len {
            Var::END
        } else {
            Var((i + 1) as u8)
        }
    };
    let edges = path
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (a, b) = (var_at(i), var_at(i + 1));
            if !e.directed {
                PatternEdge::undirected(a, b, e.label)
            } else if e.src == nodes[i] {
                PatternEdge::directed(a, b, e.label)
            } else {
                PatternEdge::directed(b, a, e.label)
            }
        })
        .collect();
    let mut binding = vec![start; len + 1];
    for (i, &node) in nodes.iter().enumerate() {
        binding[var_at(i).index()] = node;
    }
    Ok((
        ExplanationPattern::from_parts((len + 1) as u8, edges),
        ExplanationInstance::new(binding),
    ))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn l(i: u32) -> LabelId {
        LabelId(i)
    }

    pub(crate) fn d(a: u8, b: u8, label: u32) -> PatternEdge {
        PatternEdge::directed(Var(a), Var(b), l(label))
    }

    pub(crate) fn u(a: u8, b: u8, label: u32) -> PatternEdge {
        PatternEdge::undirected(Var(a), Var(b), l(label))
    }

    pub(crate) fn pat(n: usize, edges: &[PatternEdge]) -> ExplanationPattern {
        ExplanationPattern::candidate(n, edges.to_vec()).unwrap()
    }

    // labels: 0 starring, 1 spouse, 2 directed, 3 producer
    pub(crate) fn co_star() -> ExplanationPattern {
        pat(3, &[d(0, 2, 0), d(1, 2, 0)])
    }

    fn fig5a() -> ExplanationPattern {
        // co-star wedge plus a director hanging off the movie
        pat(4, &[d(0, 2, 0), d(1, 2, 0), d(3, 2, 2)])
    }

    fn fig5b() -> ExplanationPattern {
        pat(3, &[u(0, 1, 1), d(0, 2, 0), d(1, 2, 0)])
    }

    pub(crate) fn fig4d() -> ExplanationPattern {
        // start -> v0 <- v1 -> v2 <- end
        pat(5, &[d(0, 2, 0), d(3, 2, 2), d(3, 4, 2), d(1, 4, 0)])
    }

    #[test]
    fn essentiality() {
        assert!(!fig5a().is_essential());
        assert!(pat(2, &[u(0, 1, 1)]).is_essential());
        assert!(fig4d().is_essential());
        assert!(co_star().is_essential());
        // variable with no edges at all
        assert!(!pat(3, &[u(0, 1, 1)]).is_essential());
    }

    #[test]
    fn decomposability() {
        assert!(fig5b().is_decomposable());
        assert!(!co_star().is_decomposable());
        assert!(!pat(2, &[u(0, 1, 1)]).is_decomposable());
        // two co-star wedges on distinct movies
        assert!(pat(4, &[d(0, 2, 0), d(1, 2, 0), d(0, 3, 0), d(1, 3, 0)]).is_decomposable());
        // two direct edges with different labels split on the targets alone
        assert!(pat(2, &[u(0, 1, 1), d(0, 1, 0)]).is_decomposable());
    }

    #[test]
    fn minimality() {
        assert!(!fig5a().is_minimal());
        assert!(!fig5b().is_minimal());
        assert!(co_star().is_minimal());
        assert!(fig4d().is_minimal());
    }

    #[test]
    fn path_detection_and_cover() {
        assert!(co_star().is_path());
        assert!(fig4d().is_path());
        assert_eq!(co_star().min_cover_size(), Some(1));
        let fig4c = pat(3, &[d(0, 2, 0), d(0, 2, 3), d(1, 2, 0)]);
        assert!(!fig4c.is_path());
        assert!(fig4c.is_minimal());
        assert_eq!(fig4c.min_cover_size(), Some(2));
        assert_eq!(fig5a().min_cover_size(), None);
    }

    #[test]
    fn pattern_validation() {
        assert!(ExplanationPattern::candidate(1, vec![]).is_err());
        assert!(ExplanationPattern::candidate(2, vec![d(0, 2, 0)]).is_err());
        assert!(ExplanationPattern::candidate(3, vec![d(2, 2, 0)]).is_err());
        assert!(ExplanationPattern::new(3, vec![u(0, 1, 1)]).is_err());
        // duplicate edges merge
        let p = ExplanationPattern::new(2, vec![u(0, 1, 1), u(1, 0, 1)]).unwrap();
        assert_eq!(p.edges().len(), 1);
    }

    #[test]
    fn var_names_round_trip() {
        for i in 0..10u8 {
            assert_eq!(Var::from_name(&Var(i).name()), Some(Var(i)));
        }
        assert_eq!(Var::from_name("x1"), None);
    }

    #[test]
    fn path_instances_become_path_patterns() {
        let kb = KnowledgeBase::parse(crate::kb::tests::TG1).unwrap();
        let id = |n: &str| kb.resolve(n).unwrap();
        let edge = |s: &str, lab: &str, t: &str, dir: bool| {
            let (mut a, mut b) = (id(s), id(t));
            if !dir && b < a {
                std::mem::swap(&mut a, &mut b);
            }
            Edge {
                src: a,
                dst: b,
                label: kb.resolve_label(lab).unwrap(),
                directed: dir,
            }
        };

        let (p, inst) = instances_to_pattern(id("A"), &[edge("A", "spouse", "B", false)]).unwrap();
        assert_eq!(p.num_vars(), 2);
        assert_eq!(inst.binding(), &[id("A"), id("B")]);

        let (p, inst) = instances_to_pattern(
            id("A"),
            &[edge("A", "starring", "M1", true), edge("B", "starring", "M1", true)],
        )
        .unwrap();
        let starring = kb.resolve_label("starring").unwrap();
        assert_eq!(
            p.edges(),
            &[
                PatternEdge::directed(Var::START, Var(2), starring),
                PatternEdge::directed(Var::END, Var(2), starring)
            ]
        );
        assert_eq!(inst.binding(), &[id("A"), id("B"), id("M1")]);

        let (p, inst) = instances_to_pattern(
            id("A"),
            &[
                edge("A", "starring", "M1", true),
                edge("C", "directed", "M1", true),
                edge("C", "directed", "M3", true),
                edge("B", "starring", "M3", true),
            ],
        )
        .unwrap();
        assert_eq!(p.num_vars(), 5);
        assert!(p.is_path());
        assert!(inst.satisfies(&kb, &p, id("A"), id("B")));

        let err = instances_to_pattern(
            id("A"),
            &[edge("A", "starring", "M1", true), edge("A", "starring", "M1", true)],
        );
        assert!(matches!(err, Err(Error::InvalidPath(_))));
        assert!(instances_to_pattern(id("A"), &[]).is_err());
        assert!(instances_to_pattern(id("C"), &[edge("A", "spouse", "B", false)]).is_err());
    }
}
