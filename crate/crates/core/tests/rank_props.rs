mod common;

use proptest::prelude::*;

use rex_core::enumerate::{general_enum, EnumOptions, EnumStrategy};
use rex_core::measures::{InterestScore, MeasureId, Scorer};
use rex_core::rank::{dcg_score, rank_general, rank_topk_antimonotone, rank_topk_position, RankConfig, RelevanceLabels};

const ANTIMONOTONE: [MeasureId; 3] = [MeasureId::Size, MeasureId::Monocount, MeasureId::SizeMonocount];
const POSITIONAL: [MeasureId; 2] = [MeasureId::LocalDist, MeasureId::SizeLocalDist];

fn cfg(measure: MeasureId, k: usize) -> RankConfig {
    RankConfig {
        measure,
        k,
        prune: true,
        ..RankConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antimonotone_pruning_keeps_the_ranking(seed in any::<u64>(), k in prop::sample::select(vec![1usize, 3, 10])) {
        let (kb, a, b) = common::random_case(seed);
        for m in ANTIMONOTONE {
            let full = rank_general(&kb, a, b, &cfg(m, k)).unwrap();
            let pruned = rank_topk_antimonotone(&kb, a, b, &cfg(m, k)).unwrap();
            prop_assert_eq!(&pruned.entries, &full.entries, "{}", m);
            prop_assert!(pruned.counters.enumerated <= full.counters.enumerated);
        }
    }

    #[test]
    fn position_pruning_keeps_the_ranking(seed in any::<u64>(), k in prop::sample::select(vec![1usize, 3, 10])) {
        let (kb, a, b) = common::random_case(seed);
        for m in POSITIONAL {
            let full = rank_general(&kb, a, b, &cfg(m, k)).unwrap();
            let pruned = rank_topk_position(&kb, a, b, &cfg(m, k)).unwrap();
            prop_assert_eq!(&pruned.entries, &full.entries, "{}", m);
        }
    }

    #[test]
    fn round_counters_partition_each_round(seed in any::<u64>(), k in 1usize..6) {
        let (kb, a, b) = common::random_case(seed);
        let r = rank_topk_antimonotone(&kb, a, b, &cfg(MeasureId::SizeMonocount, k)).unwrap();
        prop_assert_eq!(r.counters.pruned + r.counters.expanded, r.counters.enumerated);
        let total: u64 = r.counters.rounds.iter().map(|&(e, p)| e + p).sum();
        prop_assert_eq!(total, r.counters.enumerated);
    }

    /// Every explanation derivable from an explanation scores no better than
    /// it, so withholding expansion below the k-th best loses nothing.
    #[test]
    fn descendants_never_beat_their_ancestors(seed in any::<u64>()) {
        let (kb, a, b) = common::random_case(seed);
        let opts = EnumOptions { record_derivations: true, ..EnumOptions::default() };
        let out = general_enum(&kb, a, b, 5, EnumStrategy::default(), &opts).unwrap();
        let mut children = vec![Vec::new(); out.explanations.len()];
        for d in &out.derivations {
            children[d.parent].push(d.child);
        }
        let scorer = Scorer::new(&kb, a, b);
        for m in ANTIMONOTONE {
            let scores: Vec<InterestScore> = out.explanations.iter().map(|e| scorer.score(m, e).unwrap()).collect();
            for root in 0..out.explanations.len() {
                let mut stack = children[root].clone();
                let mut seen = vec![false; out.explanations.len()];
                while let Some(x) = stack.pop() {
                    if std::mem::replace(&mut seen[x], true) {
                        continue;
                    }
                    prop_assert!(scores[x] <= scores[root], "{}", m);
                    stack.extend(&children[x]);
                }
            }
        }
    }

    #[test]
    fn dcg_never_drops_when_a_label_rises(labels in prop::collection::vec(0u8..=2, 10), at in 0usize..10) {
        let base = dcg_score(&RelevanceLabels::new(labels.clone()).unwrap());
        prop_assert!((0.0..=100.0 + 1e-9).contains(&base));
        if labels[at] < 2 {
            let mut raised = labels;
            raised[at] += 1;
            prop_assert!(dcg_score(&RelevanceLabels::new(raised).unwrap()) > base);
        }
    }
}

#[test]
fn fixtures_rank_the_same_with_and_without_pruning() {
    for (kb, a, b) in [common::tg1(), common::winslet(), common::pitt()] {
        for k in [1, 3, 10] {
            for m in POSITIONAL {
                let full = rank_general(&kb, a, b, &cfg(m, k)).unwrap();
                assert_eq!(rank_topk_position(&kb, a, b, &cfg(m, k)).unwrap().entries, full.entries);
            }
            for m in ANTIMONOTONE {
                let full = rank_general(&kb, a, b, &cfg(m, k)).unwrap();
                assert_eq!(rank_topk_antimonotone(&kb, a, b, &cfg(m, k)).unwrap().entries, full.entries);
            }
        }
    }
}
