use std::ops::ControlFlow;

use super::{ExplanationInstance, ExplanationPattern, PatternEdge, Var};
use crate::error::{Error, Result};
use crate::kb::{EndpointRole, EntityId, Incident, KnowledgeBase};

/// All injective bindings of `p` with `start`/`end` on the target variables,
/// sorted lexicographically by binding.
pub fn match_instances(
    kb: &KnowledgeBase,
    p: &ExplanationPattern,
    start: EntityId,
    end: EntityId,
) -> Result<Vec<ExplanationInstance>> {
    kb.check(start)?;
    kb.check(end)?;
    if start == end {
        return Err(Error::Config("start and end must be distinct entities".into()));
    }
    let mut out = Vec::new();
    let _ = for_each_match(kb, p, start, Some(end), &mut |b| {
        out.push(ExplanationInstance::new(b.to_vec()));
        ControlFlow::Continue(())
    });
    out.sort();
    Ok(out)
}

/// Streams every injective binding of `p` with the start variable bound to
/// `start` and the end variable bound to `end` (or to any entity when `None`).
/// Returns `Break` if the callback stopped the search.
pub(crate) fn for_each_match(
    kb: &KnowledgeBase,
    p: &ExplanationPattern,
    start: EntityId,
    end: Option<EntityId>,
    f: &mut dyn FnMut(&[EntityId]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let n = p.num_vars();
    let mut incident: Vec<Vec<PatternEdge>> = vec![Vec::new(); n];
    for e in p.edges() {
        incident[e.from.index()].push(*e);
        incident[e.to.index()].push(*e);
    }
    let mut search = Search {
        kb,
        incident,
        binding: vec![None; n],
        scratch: vec![start; n],
    };
    search.binding[0] = Some(start);
    let mut bound = 1;
    if let Some(end) = end {
        search.binding[1] = Some(end);
        bound = 2;
        // edges between the targets
        for e in p.edges() {
            if e.from.is_target() && e.to.is_target() {
                let (a, b) = (search.value(e.from), search.value(e.to));
                if !kb.has_edge(a, b, e.label, e.directed) {
                    return ControlFlow::Continue(());
                }
            }
        }
    }
    search.run(bound, f)
}

struct Search<'a> {
    kb: &'a KnowledgeBase,
    incident: Vec<Vec<PatternEdge>>,
    binding: Vec<Option<EntityId>>,
    scratch: Vec<EntityId>,
}

/// The role an already-bound entity must play in a KB edge for the
/// unbound endpoint `v` of pattern edge `e`.
fn role_at_bound(e: &PatternEdge, v: Var) -> EndpointRole {
    if !e.directed {
        EndpointRole::Undirected
    } else if e.to == v {
        EndpointRole::Source
    } else {
        EndpointRole::Target
    }
}

impl<'a> Search<'a> {
    fn value(&self, v: Var) -> EntityId {
        self.binding[v.index()].expect("bound variable")
    }

    fn candidates_via(&self, v: Var, e: &PatternEdge) -> impl Iterator<Item = &'a Incident> {
        let anchor = self.value(e.other(v));
        let role = role_at_bound(e, v);
        self.kb
            .incident_with_label(anchor, e.label)
            .iter()
            .filter(move |inc| inc.role == role)
    }

    /// Picks the unbound variable with the fewest candidates, together with
    /// the pattern edge used to generate them.
    fn choose(&self) -> Option<(Var, Option<PatternEdge>)> {
        let mut best: Option<(usize, Var, Option<PatternEdge>)> = None;
        let mut fallback = None;
        for (i, slot) in self.binding.iter().enumerate() {
            if slot.is_some() {
                continue;
            }
            let v = Var(i as u8);
            fallback.get_or_insert(v);
            for e in &self.incident[i] {
                if self.binding[e.other(v).index()].is_none() {
                    continue;
                }
                let size = self
                    .kb
                    .incident_with_label(self.value(e.other(v)), e.label)
                    .len();
                if best.map_or(true, |(s, _, _)| size < s) {
                    best = Some((size, v, Some(*e)));
                }
            }
        }
        best.map(|(_, v, e)| (v, e))
            .or_else(|| fallback.map(|v| (v, None)))
    }

    fn consistent(&self, v: Var, x: EntityId) -> bool {
        if self.binding.iter().any(|b| *b == Some(x)) {
            return false;
        }
        self.incident[v.index()].iter().all(|e| {
            let w = e.other(v);
            match self.binding[w.index()] {
                None => true,
                Some(y) => {
                    let (a, b) = if e.from == v { (x, y) } else { (y, x) };
                    self.kb.has_edge(a, b, e.label, e.directed)
                }
            }
        })
    }

    fn run(&mut self, bound: usize, f: &mut dyn FnMut(&[EntityId]) -> ControlFlow<()>) -> ControlFlow<()> {
        if bound == self.binding.len() {
            for (i, b) in self.binding.iter().enumerate() {
                self.scratch[i] = b.expect("complete binding");
            }
            return f(&self.scratch);
        }
        let Some((v, via)) = self.choose() else {
            return ControlFlow::Continue(());
        };
        let candidates: Vec<EntityId> = match via {
            Some(e) => self.candidates_via(v, &e).map(|inc| inc.other).collect(),
            // disconnected from every bound variable: any entity
            None => self.kb.entity_ids().collect(),
        };
        for x in candidates {
            if !self.consistent(v, x) {
                continue;
            }
            self.binding[v.index()] = Some(x);
            let flow = self.run(bound + 1, f);
            self.binding[v.index()] = None;
            flow?;
        }
        ControlFlow::Continue(())
    }
}
