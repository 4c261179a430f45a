use rustc_hash::FxHashMap as HashMap;

use crate::kb::EntityId;
use crate::pattern::{canonical_labeling, CanonicalForm, Explanation, ExplanationInstance, ExplanationPattern, PatternEdge, Var};

/// A partial one-to-one matching of non-target variables of one pattern onto
/// non-target variables of another. Targets always map onto targets and are
/// left implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMapping {
    /// `(variable of p1, variable of p2)`, ordered by the p1 variable.
    pub pairs: Vec<(Var, Var)>,
}

/// Every valid mapping, ordered by p1 variable, with p2 candidates in id
/// order followed by "unmatched". Mappings matching no non-target are skipped.
pub fn partial_mappings(p1: &ExplanationPattern, p2: &ExplanationPattern) -> Vec<PartialMapping> {
    mappings_with_at_least(p1, p2, 1)
}

/// The mappings of [`partial_mappings`] that match at least `min_pairs` variables.
fn mappings_with_at_least(p1: &ExplanationPattern, p2: &ExplanationPattern, min_pairs: usize) -> Vec<PartialMapping> {
    let left: Vec<Var> = p1.non_targets().collect();
    let right: Vec<Var> = p2.non_targets().collect();
    let mut out = Vec::new();
    let mut used = vec![false; p2.num_vars()];
    let mut current = Vec::new();
    extend_mapping(&left, &right, 0, min_pairs.max(1), &mut used, &mut current, &mut out);
    out
}

fn extend_mapping(
    left: &[Var],
    right: &[Var],
    i: usize,
    min_pairs: usize,
    used: &mut [bool],
    current: &mut Vec<(Var, Var)>,
    out: &mut Vec<PartialMapping>,
) {
    if current.len() + (left.len() - i) < min_pairs {
        return;
    }
    if i == left.len() {
        out.push(PartialMapping { pairs: current.clone() });
        return;
    }
    for &w in right {
        if used[w.index()] {
            continue;
        }
        used[w.index()] = true;
        current.push((left[i], w));
        extend_mapping(left, right, i + 1, min_pairs, used, current, out);
        current.pop();
        used[w.index()] = false;
    }
    extend_mapping(left, right, i + 1, min_pairs, used, current, out);
}

/// Merges two explanations under every valid partial mapping, keeping the
/// results with at most `n` variables and at least one instance. Results may
/// be isomorphic to one another.
pub fn merge(re1: &Explanation, re2: &Explanation, n: usize) -> Vec<Explanation> {
    let mut mappings = 0;
    merge_counted(re1, re2, n, &mut mappings)
}

pub(crate) fn merge_counted(re1: &Explanation, re2: &Explanation, n: usize, mappings: &mut u64) -> Vec<Explanation> {
    let mut out = Vec::new();
    for mapping in partial_mappings(&re1.pattern, &re2.pattern) {
        *mappings += 1;
        let Some((pattern, extra)) = merged_pattern(&re1.pattern, &re2.pattern, &mapping, n) else {
            continue;
        };
        let instances = join_instances(re1, re2, &mapping, &extra);
        if instances.is_empty() {
            continue;
        }
        debug_assert!(pattern.is_minimal(), "merge produced a non-minimal pattern");
        out.push(Explanation {
            pattern,
            instances,
            level: re1.level + re2.level,
        });
    }
    out
}

/// A merge result in canonical variable order. The explanation is left out
/// when the caller already knows the form.
pub(crate) struct Merged {
    pub form: CanonicalForm,
    pub explanation: Option<Explanation>,
}

/// Like [`merge`], but canonicalizes each merged pattern before joining
/// instances and skips the join for forms `known` accepts. A merge joins the
/// complete instance sets of its inputs, so the result of a known form would
/// only reproduce the instances already on record.
pub(crate) fn merge_canonical(
    re1: &Explanation,
    re2: &Explanation,
    n: usize,
    mappings: &mut u64,
    known: &dyn Fn(&CanonicalForm) -> bool,
) -> Vec<Merged> {
    let mut out = Vec::new();
    // fewer matched variables would leave too many new ones for `n`
    let free = n.saturating_sub(re1.pattern.num_vars());
    let min_pairs = (re2.pattern.num_vars() - 2).saturating_sub(free);
    for mapping in mappings_with_at_least(&re1.pattern, &re2.pattern, min_pairs) {
        *mappings += 1;
        let Some((pattern, extra)) = merged_pattern(&re1.pattern, &re2.pattern, &mapping, n) else {
            continue;
        };
        let (form, perm) = canonical_labeling(&pattern);
        if known(&form) {
            out.push(Merged {
                form,
                explanation: None,
            });
            continue;
        }
        let instances = join_instances(re1, re2, &mapping, &extra);
        if instances.is_empty() {
            continue;
        }
        debug_assert!(pattern.is_minimal(), "merge produced a non-minimal pattern");
        let mut instances: Vec<ExplanationInstance> = instances.iter().map(|i| i.permuted(&perm)).collect();
        instances.sort_unstable();
        out.push(Merged {
            form,
            explanation: Some(Explanation {
                pattern: pattern.permuted(&perm),
                instances,
                level: re1.level + re2.level,
            }),
        });
    }
    out
}

/// The union of `p1` and `p2` under `mapping`, with the p2 non-targets left
/// unmatched, or `None` if it exceeds `n` variables.
fn merged_pattern(
    p1: &ExplanationPattern,
    p2: &ExplanationPattern,
    mapping: &PartialMapping,
    n: usize,
) -> Option<(ExplanationPattern, Vec<Var>)> {
    let unmatched = p2.num_vars() - 2 - mapping.pairs.len();
    let num_vars = p1.num_vars() + unmatched;
    if num_vars > n {
        return None;
    }
    // p2 variable -> merged variable
    let mut rename: Vec<Var> = vec![Var(0); p2.num_vars()];
    rename[1] = Var::END;
    for &(a, b) in &mapping.pairs {
        rename[b.index()] = a;
    }
    let mut fresh = p1.num_vars() as u8;
    let mut extra: Vec<Var> = Vec::new();
    for w in p2.non_targets() {
        if !mapping.pairs.iter().any(|&(_, b)| b == w) {
            rename[w.index()] = Var(fresh);
            extra.push(w);
            fresh += 1;
        }
    }
    let mut edges: Vec<PatternEdge> = p1.edges().to_vec();
    edges.extend(p2.edges().iter().map(|e| e.renamed(|v| rename[v.index()])));
    Some((ExplanationPattern::from_parts(num_vars as u8, edges), extra))
}

/// Instance pairs that agree on every matched variable, coalesced into
/// injective bindings of the merged pattern.
fn join_instances(
    re1: &Explanation,
    re2: &Explanation,
    mapping: &PartialMapping,
    extra: &[Var],
) -> Vec<ExplanationInstance> {
    let mut by_key: HashMap<Vec<EntityId>, Vec<&ExplanationInstance>> = HashMap::default();
    for i2 in &re2.instances {
        let key = mapping.pairs.iter().map(|&(_, b)| i2.get(b)).collect();
        by_key.entry(key).or_default().push(i2);
    }
    let mut out = Vec::new();
    let mut key = Vec::with_capacity(mapping.pairs.len());
    for i1 in &re1.instances {
        key.clear();
        key.extend(mapping.pairs.iter().map(|&(a, _)| i1.get(a)));
        let Some(partners) = by_key.get(&key) else {
            continue;
        };
        for i2 in partners {
            let added: Vec<EntityId> = extra.iter().map(|&w| i2.get(w)).collect();
            if added.iter().any(|x| i1.binding().contains(x)) {
                continue;
            }
            let mut binding = i1.binding().to_vec();
            binding.extend(added);
            out.push(ExplanationInstance::new(binding));
        }
    }
    out
}

/// True if some member of `pool` has a pattern isomorphic to `re`'s.
pub fn duplicated(re: &Explanation, pool: &[Explanation]) -> bool {
    let form = canonical_labeling(&re.pattern).0;
    pool.iter().any(|other| canonical_labeling(&other.pattern).0 == form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::KnowledgeBase;
    use crate::pattern::match_instances;

    fn tg1() -> KnowledgeBase {
        KnowledgeBase::parse(crate::kb::tests::TG1).unwrap()
    }

    fn explanation(kb: &KnowledgeBase, p: ExplanationPattern, s: &str, e: &str) -> Explanation {
        let instances = match_instances(kb, &p, kb.resolve(s).unwrap(), kb.resolve(e).unwrap()).unwrap();
        Explanation {
            pattern: p,
            instances,
            level: 1,
        }
    }

    #[test]
    fn mapping_enumeration() {
        let kb = tg1();
        let starring = kb.resolve_label("starring").unwrap();
        let wedge = ExplanationPattern::new(
            3,
            vec![
                PatternEdge::directed(Var::START, Var(2), starring),
                PatternEdge::directed(Var::END, Var(2), starring),
            ],
        )
        .unwrap();
        let direct = ExplanationPattern::new(2, vec![PatternEdge::undirected(Var::START, Var::END, starring)]).unwrap();
        assert_eq!(partial_mappings(&wedge, &wedge).len(), 1);
        assert!(partial_mappings(&direct, &wedge).is_empty());
        assert!(partial_mappings(&direct, &direct).is_empty());
        // two non-targets on each side: 2 single matches per variable and 2 full matchings
        let chain = ExplanationPattern::new(
            4,
            vec![
                PatternEdge::directed(Var::START, Var(2), starring),
                PatternEdge::directed(Var(2), Var(3), starring),
                PatternEdge::directed(Var::END, Var(3), starring),
            ],
        )
        .unwrap();
        let maps = partial_mappings(&chain, &chain);
        assert_eq!(maps.len(), 6);
        assert_eq!(maps[0].pairs, vec![(Var(2), Var(2)), (Var(3), Var(3))]);
    }

    #[test]
    fn co_star_with_itself() {
        let kb = tg1();
        let starring = kb.resolve_label("starring").unwrap();
        let wedge = ExplanationPattern::new(
            3,
            vec![
                PatternEdge::directed(Var::START, Var(2), starring),
                PatternEdge::directed(Var::END, Var(2), starring),
            ],
        )
        .unwrap();
        let re = explanation(&kb, wedge.clone(), "A", "B");
        let merged = merge(&re, &re, 5);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].pattern, wedge);
        assert_eq!(merged[0].count(), 2);
    }

    #[test]
    fn direct_edges_cannot_merge() {
        let kb = tg1();
        let spouse = kb.resolve_label("spouse").unwrap();
        let p = ExplanationPattern::new(2, vec![PatternEdge::undirected(Var::START, Var::END, spouse)]).unwrap();
        let re = explanation(&kb, p, "A", "B");
        assert!(merge(&re, &re, 5).is_empty());
    }

    #[test]
    fn size_limit_applies() {
        let kb = tg1();
        let starring = kb.resolve_label("starring").unwrap();
        let directed = kb.resolve_label("directed").unwrap();
        let chain = ExplanationPattern::new(
            5,
            vec![
                PatternEdge::directed(Var::START, Var(2), starring),
                PatternEdge::directed(Var(3), Var(2), directed),
                PatternEdge::directed(Var(3), Var(4), directed),
                PatternEdge::directed(Var::END, Var(4), starring),
            ],
        )
        .unwrap();
        let re = explanation(&kb, chain, "A", "B");
        assert_eq!(re.count(), 1);
        // matching only one variable adds two more variables
        for m in merge(&re, &re, 5) {
            assert!(m.pattern.num_vars() <= 5);
        }
    }

    #[test]
    fn duplicated_checks_isomorphism() {
        let kb = tg1();
        let starring = kb.resolve_label("starring").unwrap();
        let spouse = kb.resolve_label("spouse").unwrap();
        let wedge = |v: u8| {
            ExplanationPattern::candidate(
                4,
                vec![
                    PatternEdge::directed(Var::START, Var(v), starring),
                    PatternEdge::directed(Var::END, Var(v), starring),
                    PatternEdge::undirected(Var(2), Var(3), spouse),
                ],
            )
            .unwrap()
        };
        let re = |p| Explanation {
            pattern: p,
            instances: vec![],
            level: 1,
        };
        let sp = ExplanationPattern::new(2, vec![PatternEdge::undirected(Var::START, Var::END, spouse)]).unwrap();
        assert!(!duplicated(&re(wedge(2)), &[]));
        assert!(duplicated(&re(wedge(2)), &[re(wedge(3))]));
        assert!(!duplicated(&re(wedge(2)), &[re(sp)]));
    }
}
