use std::collections::BTreeMap;

use rustc_hash::FxHashSet as HashSet;

use super::{Deadline, EnumCounters, EnumOptions, EnumOutput};
use crate::error::{Error, Result};
use crate::kb::{EndpointRole, EntityId, KnowledgeBase};
use crate::pattern::{canonical_labeling, CanonicalForm, Explanation, ExplanationInstance, ExplanationPattern, PatternEdge, Var};

/// Baseline enumerator: grows patterns one edge at a time from the start
/// variable, keeping every pattern that still has an instance, and reports
/// the minimal ones with at most `n` variables.
///
/// The end variable is present from the beginning (bound to `end`) but only
/// joins the pattern once an edge reaches it. Patterns are explored depth
/// first so that only one chain of extensions holds instances at a time.
pub fn naive_enum(
    kb: &KnowledgeBase,
    start: EntityId,
    end: EntityId,
    n: usize,
    opts: &EnumOptions,
) -> Result<EnumOutput> {
    kb.check(start)?;
    kb.check(end)?;
    if start == end {
        return Err(Error::Config("start and end must be distinct entities".into()));
    }
    if n < 2 {
        return Err(Error::Config(format!("pattern size limit must be at least 2, got {n}")));
    }
    let deadline = Deadline::new(opts.time_budget);
    let mut counters = EnumCounters::default();

    let seed = Explanation {
        pattern: ExplanationPattern::from_parts(2, Vec::new()),
        instances: vec![ExplanationInstance::new(vec![start, end])],
        level: 0,
    };
    let mut seen: HashSet<CanonicalForm> = HashSet::default();
    seen.insert(canonical_labeling(&seed.pattern).0);
    let mut stack = vec![seed];
    let mut found = Vec::new();

    while let Some(re) = stack.pop() {
        deadline.check()?;
        counters.patterns_expanded += 1;
        for grown in expansions(kb, &re, n, &deadline)? {
            deadline.check()?;
            let (form, grown) = grown.canonicalize();
            if !seen.insert(form) {
                counters.duplicates += 1;
                continue;
            }
            if seen.len() > opts.max_explanations {
                return Err(Error::TooManyExplanations(opts.max_explanations));
            }
            if reaches_end(&grown.pattern) && grown.pattern.is_minimal() {
                let level = grown.pattern.min_cover_size().unwrap_or(1);
                found.push(Explanation {
                    level,
                    ..grown.clone()
                });
            }
            stack.push(grown);
        }
    }
    counters.rounds = 1;
    found.sort_by_cached_key(|e| canonical_labeling(&e.pattern).0);
    Ok(EnumOutput {
        explanations: found,
        counters,
        derivations: Vec::new(),
    })
}

fn reaches_end(p: &ExplanationPattern) -> bool {
    p.edges().iter().any(|e| e.touches(Var::END))
}

/// Every single-edge extension of `re` that keeps at least one instance.
fn expansions(kb: &KnowledgeBase, re: &Explanation, n: usize, deadline: &Deadline) -> Result<Vec<Explanation>> {
    let p = &re.pattern;
    let has_end = reaches_end(p);
    let fresh = Var(p.num_vars() as u8);
    let can_grow = p.num_vars() < n;
    let mut grown: BTreeMap<PatternEdge, Vec<ExplanationInstance>> = BTreeMap::new();

    for (i, inst) in re.instances.iter().enumerate() {
        if i % 1024 == 1023 {
            deadline.check()?;
        }
        let binding = inst.binding();
        for v in p.vars() {
            if v == Var::END && !has_end {
                continue;
            }
            for inc in kb.incident(inst.get(v)) {
                let bound = binding.iter().position(|&x| x == inc.other);
                let w = match bound {
                    Some(w) => Var(w as u8),
                    None if can_grow => fresh,
                    None => continue,
                };
                let edge = match inc.role {
                    EndpointRole::Source => PatternEdge::directed(v, w, inc.edge.label),
                    EndpointRole::Target => PatternEdge::directed(w, v, inc.edge.label),
                    EndpointRole::Undirected => PatternEdge::undirected(v, w, inc.edge.label),
                };
                if bound.is_some() && p.edges().contains(&edge) {
                    continue;
                }
                let next = if bound.is_some() {
                    inst.clone()
                } else {
                    let mut b = binding.to_vec();
                    b.push(inc.other);
                    ExplanationInstance::new(b)
                };
                grown.entry(edge).or_default().push(next);
            }
        }
    }

    Ok(grown
        .into_iter()
        .map(|(edge, mut instances)| {
            instances.sort();
            instances.dedup();
            let num_vars = if edge.touches(fresh) { p.num_vars() + 1 } else { p.num_vars() };
            let mut edges = p.edges().to_vec();
            edges.push(edge);
            Explanation {
                pattern: ExplanationPattern::from_parts(num_vars as u8, edges),
                instances,
                level: 0,
            }
        })
        .collect())
}
