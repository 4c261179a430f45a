//! Top-k ranking of explanations.
//!
//! [`rank_general`] enumerates everything and sorts. [`rank_topk_antimonotone`]
//! stops expanding explanations that already score strictly below the
//! current k-th best, which is safe for measures that never increase as a
//! pattern grows. [`rank_topk_position`] evaluates distributional positions
//! with an early cut-off once a candidate can no longer reach the top k.

use std::cmp::Ordering;

use crate::enumerate::{general_enum, general_enum_with, EnumCounters, EnumOptions, EnumStrategy, ExpansionFilter};
use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase};
use crate::measures::{aggregate, m_size, position_limited, Aggregate, InterestScore, MeasureId, Scorer};
use crate::pattern::{canonical_labeling, CanonicalForm, Explanation};

#[derive(Clone, Debug)]
pub struct RankConfig {
    /// Pattern size limit in variables.
    pub n: usize,
    pub k: usize,
    pub measure: MeasureId,
    pub strategy: EnumStrategy,
    pub prune: bool,
    pub aggregate: Aggregate,
    pub sample_size: usize,
    pub seed: u64,
    pub enum_options: EnumOptions,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            n: 5,
            k: 10,
            measure: MeasureId::SizeLocalDist,
            strategy: EnumStrategy::default(),
            prune: false,
            aggregate: Aggregate::Count,
            sample_size: 100,
            seed: 0,
            enum_options: EnumOptions::default(),
        }
    }
}

impl RankConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("pattern size limit must be at least 2, got {}", self.n)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.prune && !self.measure.supports_pruning() {
            return Err(Error::Config(format!(
                "pruning is not available for measure `{}`",
                self.measure
            )));
        }
        Ok(())
    }

    fn scorer<'a>(&self, kb: &'a KnowledgeBase, start: EntityId, end: EntityId) -> Scorer<'a> {
        Scorer {
            aggregate: self.aggregate,
            sample_size: self.sample_size,
            seed: self.seed,
            ..Scorer::new(kb, start, end)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedEntry {
    pub explanation: Explanation,
    pub score: InterestScore,
    pub form: CanonicalForm,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankCounters {
    pub enumerated: u64,
    pub scored: u64,
    /// Explanations not expanded (or, for positions, not fully evaluated).
    pub pruned: u64,
    pub expanded: u64,
    /// Per union round (round 0 is the path pool): `(expanded, pruned)`.
    pub rounds: Vec<(u64, u64)>,
    pub enumeration: EnumCounters,
}

#[derive(Clone, Debug)]
pub struct RankedResult {
    pub entries: Vec<RankedEntry>,
    pub counters: RankCounters,
}

/// Better-first order: higher score, then smaller canonical form.
fn rank_order(a: (&InterestScore, &CanonicalForm), b: (&InterestScore, &CanonicalForm)) -> Ordering {
    b.0.cmp(a.0).then_with(|| a.1.cmp(b.1))
}

fn finish(mut scored: Vec<RankedEntry>, k: usize, counters: RankCounters) -> RankedResult {
    scored.sort_by(|a, b| rank_order((&a.score, &a.form), (&b.score, &b.form)));
    scored.truncate(k);
    RankedResult {
        entries: scored,
        counters,
    }
}

/// Dispatches on `cfg.prune` and the measure kind.
pub fn rank(kb: &KnowledgeBase, start: EntityId, end: EntityId, cfg: &RankConfig) -> Result<RankedResult> {
    cfg.validate()?;
    if !cfg.prune {
        rank_general(kb, start, end, cfg)
    } else if cfg.measure.is_antimonotone() {
        rank_topk_antimonotone(kb, start, end, cfg)
    } else {
        rank_topk_position(kb, start, end, cfg)
    }
}

/// Full enumeration, scoring and sorting.
pub fn rank_general(kb: &KnowledgeBase, start: EntityId, end: EntityId, cfg: &RankConfig) -> Result<RankedResult> {
    cfg.validate()?;
    let out = general_enum(kb, start, end, cfg.n, cfg.strategy, &cfg.enum_options)?;
    let scorer = cfg.scorer(kb, start, end);
    let mut counters = RankCounters {
        enumerated: out.explanations.len() as u64,
        enumeration: out.counters,
        ..RankCounters::default()
    };
    let mut scored = Vec::with_capacity(out.explanations.len());
    for re in out.explanations {
        let score = scorer.score(cfg.measure, &re)?;
        counters.scored += 1;
        scored.push(RankedEntry {
            form: canonical_labeling(&re.pattern).0,
            explanation: re,
            score,
        });
    }
    Ok(finish(scored, cfg.k, counters))
}

/// Keeps the running top-k during union and expands only explanations that
/// score at least as well as the current k-th best.
struct TopK<'a> {
    scorer: Scorer<'a>,
    measure: MeasureId,
    k: usize,
    /// Scores aligned with the union output order.
    scores: Vec<InterestScore>,
    /// Best k scores seen so far, better first.
    best: Vec<InterestScore>,
    rounds: Vec<(u64, u64)>,
    error: Option<Error>,
}

impl ExpansionFilter for TopK<'_> {
    fn select(&mut self, _round: usize, fresh: &[Explanation]) -> Vec<bool> {
        let start = self.scores.len();
        for re in fresh {
            let score = match self.scorer.score(self.measure, re) {
                Ok(s) => s,
                Err(e) => {
                    self.error.get_or_insert(e);
                    InterestScore(Vec::new())
                }
            };
            let at = self.best.partition_point(|b| *b >= score);
            if at < self.k {
                self.best.insert(at, score.clone());
                self.best.truncate(self.k);
            }
            self.scores.push(score);
        }
        let keep: Vec<bool> = if self.error.is_some() {
            vec![false; fresh.len()]
        } else {
            match self.best.get(self.k - 1) {
                Some(kth) => self.scores[start..].iter().map(|s| s >= kth).collect(),
                None => vec![true; fresh.len()],
            }
        };
        let expanded = keep.iter().filter(|&&b| b).count() as u64;
        self.rounds.push((expanded, fresh.len() as u64 - expanded));
        keep
    }
}

pub fn rank_topk_antimonotone(
    kb: &KnowledgeBase,
    start: EntityId,
    end: EntityId,
    cfg: &RankConfig,
) -> Result<RankedResult> {
    cfg.validate()?;
    if !cfg.measure.is_antimonotone() {
        return Err(Error::Config(format!(
            "measure `{}` is not anti-monotone; top-k pruning would be unsound",
            cfg.measure
        )));
    }
    let mut filter = TopK {
        scorer: cfg.scorer(kb, start, end),
        measure: cfg.measure,
        k: cfg.k,
        scores: Vec::new(),
        best: Vec::new(),
        rounds: Vec::new(),
        error: None,
    };
    let out = general_enum_with(kb, start, end, cfg.n, cfg.strategy, &cfg.enum_options, &mut filter)?;
    if let Some(e) = filter.error {
        return Err(e);
    }
    debug_assert_eq!(filter.scores.len(), out.explanations.len());
    let mut counters = RankCounters {
        enumerated: out.explanations.len() as u64,
        scored: filter.scores.len() as u64,
        enumeration: out.counters,
        ..RankCounters::default()
    };
    for &(e, p) in &filter.rounds {
        counters.expanded += e;
        counters.pruned += p;
    }
    counters.rounds = filter.rounds;
    let scored = out
        .explanations
        .into_iter()
        .zip(filter.scores)
        .map(|(re, score)| RankedEntry {
            form: canonical_labeling(&re.pattern).0,
            explanation: re,
            score,
        })
        .collect();
    Ok(finish(scored, cfg.k, counters))
}

/// Distributional ranking with early termination of position counting.
///
/// Candidates are evaluated smallest pattern first. Once k candidates are
/// known, a candidate's position is counted only up to the k-th best
/// position; for `size+local-dist` a candidate whose size already loses to
/// the k-th best is skipped without counting.
pub fn rank_topk_position(kb: &KnowledgeBase, start: EntityId, end: EntityId, cfg: &RankConfig) -> Result<RankedResult> {
    cfg.validate()?;
    if !cfg.measure.is_distributional() {
        return Err(Error::Config(format!(
            "measure `{}` has no distributional position",
            cfg.measure
        )));
    }
    let out = general_enum(kb, start, end, cfg.n, cfg.strategy, &cfg.enum_options)?;
    let scorer = cfg.scorer(kb, start, end);
    let starts = match cfg.measure {
        MeasureId::GlobalDist => scorer.global_starts()?,
        _ => vec![start],
    };
    let with_size = cfg.measure == MeasureId::SizeLocalDist;
    let mut counters = RankCounters {
        enumerated: out.explanations.len() as u64,
        enumeration: out.counters,
        ..RankCounters::default()
    };

    let mut candidates: Vec<(CanonicalForm, Explanation)> = out
        .explanations
        .into_iter()
        .map(|re| (canonical_labeling(&re.pattern).0, re))
        .collect();
    candidates.sort_by(|(fa, a), (fb, b)| {
        a.pattern
            .num_vars()
            .cmp(&b.pattern.num_vars())
            .then_with(|| fa.cmp(fb))
    });

    // current top k, better first
    let mut top: Vec<RankedEntry> = Vec::new();
    for (form, re) in candidates {
        let kth = if top.len() == cfg.k { top.last() } else { None };
        let size = m_size(&re.pattern);
        let limit = match kth {
            None => None,
            Some(kth) => {
                let kth_pos = -*kth.score.components().last().unwrap();
                if with_size {
                    match size.0[0].cmp(&kth.score.0[0]) {
                        Ordering::Less => {
                            counters.pruned += 1;
                            continue;
                        }
                        Ordering::Greater => None,
                        Ordering::Equal => Some(kth_pos.to_integer() as u64),
                    }
                } else {
                    Some(kth_pos.to_integer() as u64)
                }
            }
        };
        let a = aggregate(cfg.aggregate, &re);
        counters.scored += 1;
        let Some(position) = position_limited(kb, &re.pattern, &starts, cfg.aggregate, a, limit) else {
            counters.pruned += 1;
            continue;
        };
        let position = InterestScore::single(-(position as i64));
        let score = if with_size { size.then(position) } else { position };
        let entry = RankedEntry {
            explanation: re,
            score,
            form,
        };
        let at = top.partition_point(|t| rank_order((&t.score, &t.form), (&entry.score, &entry.form)) == Ordering::Less);
        if at < cfg.k {
            top.insert(at, entry);
            top.truncate(cfg.k);
        }
    }
    counters.expanded = counters.scored - (counters.pruned.min(counters.scored));
    Ok(finish(top, cfg.k, counters))
}

/// Per-rank relevance judgements for the ten top results.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelevanceLabels(Vec<u8>);

impl RelevanceLabels {
    pub const LEN: usize = 10;

    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.len() != Self::LEN {
            return Err(Error::Labels(format!("expected {} labels, got {}", Self::LEN, labels.len())));
        }
        if let Some(bad) = labels.iter().find(|&&s| s > 2) {
            return Err(Error::Labels(format!("label {bad} is outside 0..=2")));
        }
        Ok(RelevanceLabels(labels))
    }

    /// One integer per line; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let labels = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.parse::<u8>()
                    .map_err(|_| Error::Labels(format!("line {}: `{l}` is not a relevance label", i + 1)))
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(labels)
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }
}

/// Rank-discounted relevance scaled so that ten labels of 2 score 100.
pub fn dcg_score(labels: &RelevanceLabels) -> f64 {
    let weights: Vec<f64> = (1..=RelevanceLabels::LEN).map(|i| 1.0 / ((i + 1) as f64).log2()).collect();
    let m = 100.0 / (2.0 * weights.iter().sum::<f64>());
    m * weights.iter().zip(&labels.0).map(|(w, &s)| w * s as f64).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tg1() -> (KnowledgeBase, EntityId, EntityId) {
        let kb = KnowledgeBase::parse(crate::kb::tests::TG1).unwrap();
        let (a, b) = (kb.resolve("A").unwrap(), kb.resolve("B").unwrap());
        (kb, a, b)
    }

    fn cfg(measure: MeasureId, k: usize) -> RankConfig {
        RankConfig {
            measure,
            k,
            ..RankConfig::default()
        }
    }

    #[test]
    fn size_puts_the_spouse_edge_first() {
        let (kb, a, b) = tg1();
        let r = rank_general(&kb, a, b, &cfg(MeasureId::Size, 10)).unwrap();
        assert_eq!(r.entries[0].score, InterestScore::single(-2));
        assert_eq!(r.entries[0].explanation.pattern.num_vars(), 2);
        assert_eq!(r.entries.len() as u64, r.counters.enumerated);
        for w in r.entries.windows(2) {
            assert!(rank_order((&w[0].score, &w[0].form), (&w[1].score, &w[1].form)) == Ordering::Less);
        }
    }

    #[test]
    fn count_top_one_is_the_co_star_wedge() {
        let (kb, a, b) = tg1();
        let r = rank_general(&kb, a, b, &cfg(MeasureId::Count, 1)).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].score, InterestScore::single(2));
        assert_eq!(r.entries[0].explanation.pattern.num_vars(), 3);
    }

    #[test]
    fn pruned_rankings_match() {
        let (kb, a, b) = tg1();
        for measure in [MeasureId::Size, MeasureId::Monocount, MeasureId::SizeMonocount] {
            for k in [1, 3, 10] {
                let full = rank_general(&kb, a, b, &cfg(measure, k)).unwrap();
                let pruned = rank_topk_antimonotone(&kb, a, b, &cfg(measure, k)).unwrap();
                assert_eq!(full.entries, pruned.entries, "{measure} k={k}");
                assert_eq!(
                    pruned.counters.expanded + pruned.counters.pruned,
                    pruned.counters.enumerated
                );
            }
        }
        let big = rank_topk_antimonotone(&kb, a, b, &cfg(MeasureId::Size, 1000)).unwrap();
        assert_eq!(big.counters.pruned, 0);
        for measure in [MeasureId::LocalDist, MeasureId::SizeLocalDist, MeasureId::GlobalDist] {
            for k in [1, 3, 10] {
                let full = rank_general(&kb, a, b, &cfg(measure, k)).unwrap();
                let pruned = rank_topk_position(&kb, a, b, &cfg(measure, k)).unwrap();
                assert_eq!(full.entries, pruned.entries, "{measure} k={k}");
            }
        }
    }

    #[test]
    fn config_errors() {
        let (kb, a, b) = tg1();
        assert!(rank_topk_antimonotone(&kb, a, b, &cfg(MeasureId::Count, 3)).is_err());
        assert!(rank_topk_position(&kb, a, b, &cfg(MeasureId::Size, 3)).is_err());
        let mut c = cfg(MeasureId::Count, 3);
        c.prune = true;
        assert!(rank(&kb, a, b, &c).is_err());
        assert!(rank(&kb, a, b, &cfg(MeasureId::Size, 0)).is_err());
    }

    #[test]
    fn dcg_examples() {
        let all = |s| RelevanceLabels::new(vec![s; 10]).unwrap();
        assert!((dcg_score(&all(2)) - 100.0).abs() < 1e-9);
        assert_eq!(dcg_score(&all(0)), 0.0);
        let mut first = vec![0; 10];
        first[0] = 2;
        let sum: f64 = (1..=10).map(|i| 1.0 / ((i + 1) as f64).log2()).sum();
        assert!((dcg_score(&RelevanceLabels::new(first).unwrap()) - 100.0 / sum).abs() < 1e-9);
        assert!(RelevanceLabels::new(vec![1; 9]).is_err());
        assert!(RelevanceLabels::new(vec![3; 10]).is_err());
        assert!(RelevanceLabels::parse("2\n2\n2\n2\n2\n2\n2\n2\n2\nx\n").is_err());
        assert_eq!(RelevanceLabels::parse(&"1\n".repeat(10)).unwrap().labels(), &[1; 10]);
    }
}
