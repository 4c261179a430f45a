#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rex_core::enumerate::EnumOutput;
use rex_core::kb::{EntityId, KnowledgeBase, LabelId};
use rex_core::pattern::{CanonicalForm, ExplanationInstance, ExplanationPattern, PatternEdge, Var};

pub const TG1: &str = "\
A\tstarring\tM1\tD
B\tstarring\tM1\tD
A\tstarring\tM2\tD
B\tstarring\tM2\tD
A\tspouse\tB\tU
C\tdirected\tM1\tD
C\tdirected\tM3\tD
B\tstarring\tM3\tD
";

pub fn tg1() -> (KnowledgeBase, EntityId, EntityId) {
    let kb = KnowledgeBase::parse(TG1).unwrap();
    let (a, b) = (kb.resolve("A").unwrap(), kb.resolve("B").unwrap());
    (kb, a, b)
}

/// The director-spouse explanation between two co-stars, with a second
/// film by the same director.
pub const WINSLET: &str = "\
Kate Winslet\tspouse\tSam Mendes\tU
Sam Mendes\tdirected\tRevolutionary Road\tD
Kate Winslet\tstarring\tRevolutionary Road\tD
Leonardo DiCaprio\tstarring\tRevolutionary Road\tD
Sam Mendes\tdirected\tRevolutionary Road II\tD
Kate Winslet\tstarring\tRevolutionary Road II\tD
Leonardo DiCaprio\tstarring\tRevolutionary Road II\tD
James Cameron\tdirected\tTitanic\tD
Kate Winslet\tstarring\tTitanic\tD
Leonardo DiCaprio\tstarring\tTitanic\tD
";

pub fn winslet() -> (KnowledgeBase, EntityId, EntityId) {
    let kb = KnowledgeBase::parse(WINSLET).unwrap();
    let a = kb.resolve("Kate Winslet").unwrap();
    let b = kb.resolve("Leonardo DiCaprio").unwrap();
    (kb, a, b)
}

/// start -spouse- v0 -directed-> v1, start -starring-> v1, end -starring-> v1
pub fn spouse_director(kb: &KnowledgeBase) -> ExplanationPattern {
    let (spouse, directed, starring) = labels3(kb, "spouse", "directed", "starring");
    ExplanationPattern::new(
        4,
        vec![
            PatternEdge::undirected(Var::START, Var(2), spouse),
            PatternEdge::directed(Var(2), Var(3), directed),
            PatternEdge::directed(Var::START, Var(3), starring),
            PatternEdge::directed(Var::END, Var(3), starring),
        ],
    )
    .unwrap()
}

fn labels3(kb: &KnowledgeBase, a: &str, b: &str, c: &str) -> (LabelId, LabelId, LabelId) {
    (
        kb.resolve_label(a).unwrap(),
        kb.resolve_label(b).unwrap(),
        kb.resolve_label(c).unwrap(),
    )
}

pub fn co_star(kb: &KnowledgeBase) -> ExplanationPattern {
    let starring = kb.resolve_label("starring").unwrap();
    ExplanationPattern::new(
        3,
        vec![
            PatternEdge::directed(Var::START, Var(2), starring),
            PatternEdge::directed(Var::END, Var(2), starring),
        ],
    )
    .unwrap()
}

pub fn spouse(kb: &KnowledgeBase) -> ExplanationPattern {
    let spouse = kb.resolve_label("spouse").unwrap();
    ExplanationPattern::new(2, vec![PatternEdge::undirected(Var::START, Var::END, spouse)]).unwrap()
}

/// An actor whose co-stars share 1, 2, 3 and 4 films with him 130, 8, 10 and
/// 2 times respectively; one single-film co-star is also his spouse.
pub fn pitt() -> (KnowledgeBase, EntityId, EntityId) {
    let mut text = String::new();
    let mut movie = 0;
    let mut actor = 0;
    let mut add = |text: &mut String, name: &str, shared: usize| {
        for _ in 0..shared {
            writeln!(text, "Brad Pitt\tstarring\tfilm {movie:03}\tD").unwrap();
            writeln!(text, "{name}\tstarring\tfilm {movie:03}\tD").unwrap();
            movie += 1;
        }
    };
    add(&mut text, "Angelina Jolie", 1);
    for (shared, count) in [(1, 129), (2, 8), (3, 10), (4, 2)] {
        for _ in 0..count {
            add(&mut text, &format!("actor {actor:03}"), shared);
            actor += 1;
        }
    }
    writeln!(text, "Brad Pitt\tspouse\tAngelina Jolie\tU").unwrap();
    let kb = KnowledgeBase::parse(&text).unwrap();
    let (a, b) = (kb.resolve("Brad Pitt").unwrap(), kb.resolve("Angelina Jolie").unwrap());
    (kb, a, b)
}

/// A random KB with at most 12 nodes, 25 edges (no more than three times the
/// node count) and 4 labels, and a pair
/// joined by at least one path of length at most 4.
pub fn random_case(seed: u64) -> (KnowledgeBase, EntityId, EntityId) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let nodes = rng.gen_range(3..=12);
        let labels = rng.gen_range(1..=4);
        let directed: Vec<bool> = (0..labels).map(|_| rng.gen_bool(0.7)).collect();
        let edges = rng.gen_range(2..=(3 * nodes).min(25));
        let mut text = String::new();
        let mut seen = BTreeSet::new();
        for _ in 0..edges * 3 {
            if seen.len() == edges {
                break;
            }
            let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
            let l = rng.gen_range(0..labels);
            if a == b {
                continue;
            }
            let key = if directed[l] { (a, b, l) } else { (a.min(b), a.max(b), l) };
            if seen.insert(key) {
                let flag = if directed[l] { 'D' } else { 'U' };
                writeln!(text, "e{a}\tl{l}\te{b}\t{flag}").unwrap();
            }
        }
        let kb = KnowledgeBase::parse(&text).unwrap();
        let ids: Vec<EntityId> = kb.entity_ids().collect();
        let mut pairs: Vec<(EntityId, EntityId)> = ids
            .iter()
            .flat_map(|&a| ids.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a != b && kb.connectedness(a, b, 4).unwrap() > 0)
            .collect();
        pairs.sort();
        if let Some(&(a, b)) = pairs.choose(&mut rng) {
            return (kb, a, b);
        }
    }
}

pub type ExplanationSet = BTreeSet<(CanonicalForm, Vec<ExplanationInstance>)>;

/// Canonical forms with full instance sets, order-independent.
pub fn explanation_set(out: &EnumOutput) -> ExplanationSet {
    out.explanations
        .iter()
        .map(|e| {
            let (form, c) = e.clone().canonicalize();
            (form, c.instances)
        })
        .collect()
}
