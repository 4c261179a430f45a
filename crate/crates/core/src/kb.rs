//! The knowledge base: an immutable graph of entities joined by labeled,
//! directed or undirected relationship edges.
//!
//! The on-disk format is UTF-8 text with one record per line:
//!
//! ```text
//! # comment
//! brad_pitt<TAB>spouse<TAB>angelina_jolie<TAB>U
//! brad_pitt<TAB>starring<TAB>troy<TAB>D
//! lonely_entity
//! ```
//!
//! A four-field line is an edge `src label dst flag` with `flag` either `D`
//! (directed, `src -> dst`) or `U` (undirected). A single-field line declares
//! an entity that may have no incident edges. Blank lines and lines starting
//! with `#` are skipped.
//!
//! Entity and label ids are assigned in lexicographic order of their names,
//! so comparing ids agrees with comparing names.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelId(pub u32);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A relationship edge. Undirected edges are stored with `src < dst`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: EntityId,
    pub dst: EntityId,
    pub label: LabelId,
    pub directed: bool,
}

impl Edge {
    /// The endpoint opposite `v`. `v` must be one of the endpoints.
    pub fn other(&self, v: EntityId) -> EntityId {
        if self.src == v {
            self.dst
        } else {
            self.src
        }
    }
}

/// How an entity participates in one of its incident edges.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndpointRole {
    /// The entity is the tail of a directed edge.
    Source,
    /// The entity is the head of a directed edge.
    Target,
    /// The edge is undirected.
    Undirected,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Incident {
    pub edge: Edge,
    pub other: EntityId,
    pub role: EndpointRole,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Connectedness {
    Low,
    Medium,
    High,
}

impl std::fmt::Display for Connectedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Connectedness::Low => "low",
            Connectedness::Medium => "medium",
            Connectedness::High => "high",
        })
    }
}

/// Buckets a simple-path count into low (0..=30), medium (31..=100) and high (>100).
pub fn classify_connectedness(count: u64) -> Connectedness {
    match count {
        0..=30 => Connectedness::Low,
        31..=100 => Connectedness::Medium,
        _ => Connectedness::High,
    }
}

#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    names: Vec<String>,
    ids: HashMap<String, EntityId>,
    labels: Vec<String>,
    label_ids: HashMap<String, LabelId>,
    edges: Vec<Edge>,
    // per entity, sorted by (label, other, role)
    adjacency: Vec<Vec<Incident>>,
    edge_set: HashSet<Edge>,
    duplicates_dropped: usize,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.labels == other.labels && self.edges == other.edges
    }
}

impl Eq for KnowledgeBase {}

/// Collects entities and edges by name before ids are assigned.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBaseBuilder {
    entities: BTreeSet<String>,
    edges: Vec<(String, String, String, bool)>,
}

impl KnowledgeBaseBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity(&mut self, name: impl Into<String>) -> &mut Self {
        self.entities.insert(name.into());
        self
    }

    pub fn directed(&mut self, src: &str, label: &str, dst: &str) -> &mut Self {
        self.edge(src, label, dst, true)
    }

    pub fn undirected(&mut self, a: &str, label: &str, b: &str) -> &mut Self {
        self.edge(a, label, b, false)
    }

    pub fn edge(&mut self, src: &str, label: &str, dst: &str, directed: bool) -> &mut Self {
        self.entities.insert(src.to_string());
        self.entities.insert(dst.to_string());
        self.edges
            .push((src.to_string(), label.to_string(), dst.to_string(), directed));
        self
    }

    pub fn build(&self) -> KnowledgeBase {
        let names: Vec<String> = self.entities.iter().cloned().collect();
        let ids: HashMap<String, EntityId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), EntityId(i as u32)))
            .collect();
        let label_set: BTreeSet<&String> = self.edges.iter().map(|e| &e.1).collect();
        let labels: Vec<String> = label_set.into_iter().cloned().collect();
        let label_ids: HashMap<String, LabelId> = labels
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), LabelId(i as u32)))
            .collect();

        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|(s, l, d, directed)| {
                let (mut src, mut dst) = (ids[s], ids[d]);
                if !directed && dst < src {
                    std::mem::swap(&mut src, &mut dst);
                }
                Edge {
                    src,
                    dst,
                    label: label_ids[l],
                    directed: *directed,
                }
            })
            .collect();
        let before = edges.len();
        edges.sort_by_key(|e| (e.src, e.label, e.dst, e.directed));
        edges.dedup();
        let duplicates_dropped = before - edges.len();
        if duplicates_dropped > 0 {
            log::warn!("dropped {duplicates_dropped} duplicate edge(s)");
        }

        let mut adjacency: Vec<Vec<Incident>> = vec![Vec::new(); names.len()];
        for e in &edges {
            let (src_role, dst_role) = if e.directed {
                (EndpointRole::Source, EndpointRole::Target)
            } else {
                (EndpointRole::Undirected, EndpointRole::Undirected)
            };
            adjacency[e.src.index()].push(Incident {
                edge: *e,
                other: e.dst,
                role: src_role,
            });
            adjacency[e.dst.index()].push(Incident {
                edge: *e,
                other: e.src,
                role: dst_role,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|inc| (inc.edge.label, inc.other, inc.role));
        }
        let edge_set = edges.iter().copied().collect();

        KnowledgeBase {
            names,
            ids,
            labels,
            label_ids,
            edges,
            adjacency,
            edge_set,
            duplicates_dropped,
        }
    }
}

impl KnowledgeBase {
    pub fn builder() -> KnowledgeBaseBuilder {
        KnowledgeBaseBuilder::new()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut builder = KnowledgeBaseBuilder::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            if fields.iter().any(|f| f.is_empty()) {
                return Err(parse_err("empty field".into()));
            }
            match fields.as_slice() {
                [entity] => {
                    builder.entity(*entity);
                }
                [src, label, dst, flag] => {
                    let directed = match *flag {
                        "D" => true,
                        "U" => false,
                        other => return Err(parse_err(format!("unknown flag `{other}`"))),
                    };
                    if src == dst {
                        return Err(parse_err(format!("self-loop on `{src}`")));
                    }
                    builder.edge(src, label, dst, directed);
                }
                _ => {
                    return Err(parse_err(format!(
                        "expected 4 tab-separated fields, found {}",
                        fields.len()
                    )))
                }
            }
        }
        Ok(builder.build())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Renders the knowledge base in the file format accepted by [`KnowledgeBase::parse`].
    pub fn to_kb_string(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            if self.adjacency[i].is_empty() {
                out.push_str(name);
                out.push('\n');
            }
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                self.names[e.src.index()],
                self.labels[e.label.index()],
                self.names[e.dst.index()],
                if e.directed { "D" } else { "U" }
            );
        }
        out
    }

    pub fn num_entities(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.names.len() as u32).map(EntityId)
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    pub fn entity(&self, name: &str) -> Option<EntityId> {
        self.ids.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<EntityId> {
        self.entity(name)
            .ok_or_else(|| Error::UnknownEntity(name.to_string()))
    }

    pub fn name(&self, id: EntityId) -> &str {
        &self.names[id.index()]
    }

    pub fn label(&self, name: &str) -> Option<LabelId> {
        self.label_ids.get(name).copied()
    }

    pub fn resolve_label(&self, name: &str) -> Result<LabelId> {
        self.label(name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        &self.labels[id.index()]
    }

    pub fn labels(&self) -> impl Iterator<Item = (LabelId, &str)> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (LabelId(i as u32), l.as_str()))
    }

    pub fn contains(&self, id: EntityId) -> bool {
        id.index() < self.names.len()
    }

    pub(crate) fn check(&self, id: EntityId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownEntity(format!("#{}", id.0)))
        }
    }

    /// Incident edges of `v`, sorted by label and then by the other endpoint.
    pub fn incident_edges(&self, v: EntityId) -> Result<&[Incident]> {
        self.check(v)?;
        Ok(&self.adjacency[v.index()])
    }

    /// Incident edges without the membership check.
    pub(crate) fn incident(&self, v: EntityId) -> &[Incident] {
        &self.adjacency[v.index()]
    }

    /// Incident edges of `v` carrying `label`.
    pub(crate) fn incident_with_label(&self, v: EntityId, label: LabelId) -> &[Incident] {
        let list = &self.adjacency[v.index()];
        let lo = list.partition_point(|inc| inc.edge.label < label);
        let hi = list.partition_point(|inc| inc.edge.label <= label);
        &list[lo..hi]
    }

    pub fn degree(&self, v: EntityId) -> Result<usize> {
        self.check(v)?;
        Ok(self.adjacency[v.index()].len())
    }

    /// True if the KB holds `src -label-> dst` (directed) or `src -label- dst` (undirected).
    pub fn has_edge(&self, src: EntityId, dst: EntityId, label: LabelId, directed: bool) -> bool {
        let (src, dst) = if !directed && dst < src {
            (dst, src)
        } else {
            (src, dst)
        };
        self.edge_set.contains(&Edge {
            src,
            dst,
            label,
            directed,
        })
    }

    /// Number of simple paths between `a` and `b` with at most `max_len` edges,
    /// ignoring edge direction. Parallel edges yield distinct paths.
    pub fn connectedness(&self, a: EntityId, b: EntityId, max_len: usize) -> Result<u64> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::Config("connectedness needs two distinct entities".into()));
        }
        let mut on_path = vec![false; self.names.len()];
        on_path[a.index()] = true;
        Ok(self.count_paths(a, b, max_len, &mut on_path))
    }

    fn count_paths(&self, at: EntityId, target: EntityId, budget: usize, on_path: &mut [bool]) -> u64 {
        if budget == 0 {
            return 0;
        }
        let mut total = 0;
        for inc in &self.adjacency[at.index()] {
            let next = inc.other;
            if next == target {
                total += 1;
            } else if !on_path[next.index()] && budget > 1 {
                on_path[next.index()] = true;
                total += self.count_paths(next, target, budget - 1, on_path);
                on_path[next.index()] = false;
            }
        }
        total
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TG1: &str = "A\tstarring\tM1\tD\n\
B\tstarring\tM1\tD\n\
A\tstarring\tM2\tD\n\
B\tstarring\tM2\tD\n\
A\tspouse\tB\tU\n\
C\tdirected\tM1\tD\n\
C\tdirected\tM3\tD\n\
B\tstarring\tM3\tD\n";

    fn tg1() -> KnowledgeBase {
        KnowledgeBase::parse(TG1).unwrap()
    }

    #[test]
    fn empty_file_gives_empty_kb() {
        let kb = KnowledgeBase::parse("").unwrap();
        assert_eq!(kb.num_entities(), 0);
        assert_eq!(kb.num_edges(), 0);
    }

    #[test]
    fn undirected_edges_are_canonicalized() {
        let kb = KnowledgeBase::parse("A\tspouse\tB\tU\nB\tspouse\tA\tU\n").unwrap();
        assert_eq!(kb.num_entities(), 2);
        assert_eq!(kb.num_edges(), 1);
        assert_eq!(kb.duplicates_dropped(), 1);
    }

    #[test]
    fn directed_edges_are_not_merged_with_their_reverse() {
        let kb = KnowledgeBase::parse("A\tknows\tB\tD\nB\tknows\tA\tD\n").unwrap();
        assert_eq!(kb.num_edges(), 2);
    }

    #[test]
    fn tg1_counts() {
        let kb = tg1();
        assert_eq!(kb.num_entities(), 6);
        assert_eq!(kb.num_edges(), 8);
        assert_eq!(kb.num_labels(), 3);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let kb = KnowledgeBase::parse("# header\n\nA\tx\tB\tD\r\n").unwrap();
        assert_eq!(kb.num_edges(), 1);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = KnowledgeBase::parse("A\tx\tB\tD\nA\tx\tB\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = KnowledgeBase::parse("A\tx\tB\tQ\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = KnowledgeBase::parse("# c\nA\t\tB\tD\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = KnowledgeBase::parse("A\tx\tA\tU\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = KnowledgeBase::load("/nonexistent/kb.tsv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn incident_edges_on_tg1() {
        let kb = tg1();
        let m2 = kb.resolve("M2").unwrap();
        let inc = kb.incident_edges(m2).unwrap();
        assert_eq!(inc.len(), 2);
        assert!(inc.iter().all(|i| i.role == EndpointRole::Target));
        let others: Vec<&str> = inc.iter().map(|i| kb.name(i.other)).collect();
        assert_eq!(others, ["A", "B"]);

        let a = kb.resolve("A").unwrap();
        let inc = kb.incident_edges(a).unwrap();
        assert_eq!(inc.len(), 3);
        // sorted by label: spouse < starring
        assert_eq!(kb.label_name(inc[0].edge.label), "spouse");
        assert_eq!(inc[0].role, EndpointRole::Undirected);
    }

    #[test]
    fn isolated_entity_has_no_incident_edges() {
        let kb = KnowledgeBase::parse("lonely\nA\tx\tB\tD\n").unwrap();
        let lonely = kb.resolve("lonely").unwrap();
        assert!(kb.incident_edges(lonely).unwrap().is_empty());
        assert_eq!(kb.degree(lonely).unwrap(), 0);
    }

    #[test]
    fn unknown_entity_errors() {
        let kb = tg1();
        assert!(matches!(kb.resolve("Z"), Err(Error::UnknownEntity(_))));
        assert!(kb.incident_edges(EntityId(99)).is_err());
        assert!(kb.degree(EntityId(99)).is_err());
    }

    #[test]
    fn degrees() {
        let kb = tg1();
        assert_eq!(kb.degree(kb.resolve("A").unwrap()).unwrap(), 3);
        assert_eq!(kb.degree(kb.resolve("C").unwrap()).unwrap(), 2);
        let single = KnowledgeBase::parse("a\tx\tb\tU\n").unwrap();
        assert_eq!(single.degree(single.resolve("a").unwrap()).unwrap(), 1);
    }

    #[test]
    fn connectedness_examples() {
        let single = KnowledgeBase::parse("a\tx\tb\tU\n").unwrap();
        let (a, b) = (single.resolve("a").unwrap(), single.resolve("b").unwrap());
        assert_eq!(single.connectedness(a, b, 4).unwrap(), 1);

        let kb = tg1();
        let (a, b) = (kb.resolve("A").unwrap(), kb.resolve("B").unwrap());
        assert_eq!(kb.connectedness(a, b, 4).unwrap(), 4);
        assert_eq!(kb.connectedness(a, b, 1).unwrap(), 1);
        assert_eq!(kb.connectedness(a, b, 2).unwrap(), 3);
    }

    #[test]
    fn classify_boundaries() {
        assert_eq!(classify_connectedness(0), Connectedness::Low);
        assert_eq!(classify_connectedness(30), Connectedness::Low);
        assert_eq!(classify_connectedness(31), Connectedness::Medium);
        assert_eq!(classify_connectedness(50), Connectedness::Medium);
        assert_eq!(classify_connectedness(100), Connectedness::Medium);
        assert_eq!(classify_connectedness(101), Connectedness::High);
    }

    #[test]
    fn has_edge_respects_orientation() {
        let kb = tg1();
        let (a, b, m1) = (
            kb.resolve("A").unwrap(),
            kb.resolve("B").unwrap(),
            kb.resolve("M1").unwrap(),
        );
        let starring = kb.resolve_label("starring").unwrap();
        let spouse = kb.resolve_label("spouse").unwrap();
        assert!(kb.has_edge(a, m1, starring, true));
        assert!(!kb.has_edge(m1, a, starring, true));
        assert!(kb.has_edge(b, a, spouse, false));
        assert!(kb.has_edge(a, b, spouse, false));
        assert!(!kb.has_edge(a, b, spouse, true));
    }
}
