//! Interestingness measures.
//!
//! Every measure produces an [`InterestScore`], a tuple of rationals compared
//! lexicographically where larger is more interesting. Size and position
//! enter negated.

mod conductance;
mod distribution;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;

pub use conductance::conductance;
pub use distribution::{
    global_distribution, local_distribution, local_values, m_position_raw, position_limited, sample_starts,
    Distribution, DistributionKind, SampleMeta,
};

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase};
use crate::pattern::{match_instances, Explanation, ExplanationInstance, ExplanationPattern};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum MeasureId {
    Size,
    RandomWalk,
    Count,
    Monocount,
    LocalDist,
    GlobalDist,
    SizeMonocount,
    SizeLocalDist,
}

impl MeasureId {
    pub const ALL: [MeasureId; 8] = [
        MeasureId::Size,
        MeasureId::RandomWalk,
        MeasureId::Count,
        MeasureId::Monocount,
        MeasureId::LocalDist,
        MeasureId::GlobalDist,
        MeasureId::SizeMonocount,
        MeasureId::SizeLocalDist,
    ];

    /// Measures that never increase when a pattern grows.
    pub fn is_antimonotone(self) -> bool {
        matches!(self, MeasureId::Size | MeasureId::Monocount | MeasureId::SizeMonocount)
    }

    pub fn is_distributional(self) -> bool {
        matches!(self, MeasureId::LocalDist | MeasureId::GlobalDist | MeasureId::SizeLocalDist)
    }

    pub fn supports_pruning(self) -> bool {
        self.is_antimonotone() || self.is_distributional()
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureId::Size => "size",
            MeasureId::RandomWalk => "random-walk",
            MeasureId::Count => "count",
            MeasureId::Monocount => "monocount",
            MeasureId::LocalDist => "local-dist",
            MeasureId::GlobalDist => "global-dist",
            MeasureId::SizeMonocount => "size+monocount",
            MeasureId::SizeLocalDist => "size+local-dist",
        })
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown measure `{s}`")))
    }
}

/// Aggregate underlying the distributional measures.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum Aggregate {
    #[default]
    Count,
    Monocount,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Count => "count",
            Aggregate::Monocount => "monocount",
        })
    }
}

impl FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Aggregate::Count),
            "monocount" => Ok(Aggregate::Monocount),
            other => Err(Error::Config(format!("unknown aggregate `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterestScore(pub Vec<Rational64>);

impl InterestScore {
    pub fn single(v: impl Into<Rational64>) -> Self {
        InterestScore(vec![v.into()])
    }

    pub fn components(&self) -> &[Rational64] {
        &self.0
    }

    pub fn then(mut self, other: InterestScore) -> Self {
        self.0.extend(other.0);
        self
    }
}

impl fmt::Display for InterestScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|r| {
                if r.is_integer() {
                    r.to_integer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            })
            .collect();
        if parts.len() == 1 {
            f.write_str(&parts[0])
        } else {
            write!(f, "({})", parts.join(", "))
        }
    }
}

pub fn m_size(p: &ExplanationPattern) -> InterestScore {
    InterestScore::single(-(p.num_vars() as i64))
}

pub fn m_random_walk(p: &ExplanationPattern) -> InterestScore {
    InterestScore::single(conductance(p))
}

pub fn m_count(kb: &KnowledgeBase, p: &ExplanationPattern, start: EntityId, end: EntityId) -> Result<InterestScore> {
    Ok(InterestScore::single(match_instances(kb, p, start, end)?.len() as i64))
}

pub fn m_monocount(kb: &KnowledgeBase, p: &ExplanationPattern, start: EntityId, end: EntityId) -> Result<InterestScore> {
    let instances = match_instances(kb, p, start, end)?;
    Ok(InterestScore::single(monocount(p, &instances) as i64))
}

/// Fewest distinct entities taken by any non-target variable; 1 for a
/// pattern without non-targets, 0 without instances.
pub fn monocount(p: &ExplanationPattern, instances: &[ExplanationInstance]) -> u64 {
    if instances.is_empty() {
        return 0;
    }
    p.non_targets()
        .map(|v| instances.iter().map(|i| i.get(v)).collect::<HashSet<_>>().len() as u64)
        .min()
        .unwrap_or(1)
}

pub fn aggregate(agg: Aggregate, re: &Explanation) -> u64 {
    match agg {
        Aggregate::Count => re.count() as u64,
        Aggregate::Monocount => monocount(&re.pattern, &re.instances),
    }
}

/// Negated number of pairs in `d` whose aggregate strictly exceeds `a`.
pub fn m_position(a: u64, d: &Distribution) -> InterestScore {
    InterestScore::single(-(m_position_raw(a, d) as i64))
}

/// Scores explanations of one target pair.
#[derive(Clone, Debug)]
pub struct Scorer<'a> {
    pub kb: &'a KnowledgeBase,
    pub start: EntityId,
    pub end: EntityId,
    pub aggregate: Aggregate,
    pub sample_size: usize,
    pub seed: u64,
}

impl<'a> Scorer<'a> {
    pub fn new(kb: &'a KnowledgeBase, start: EntityId, end: EntityId) -> Self {
        Scorer {
            kb,
            start,
            end,
            aggregate: Aggregate::Count,
            sample_size: 100,
            seed: 0,
        }
    }

    /// Start entities the global distribution is drawn from.
    pub fn global_starts(&self) -> Result<Vec<EntityId>> {
        sample_starts(self.kb, self.sample_size, self.seed)
    }

    /// Scores `re`, whose instance set is taken as complete for the pair.
    pub fn score(&self, measure: MeasureId, re: &Explanation) -> Result<InterestScore> {
        let p = &re.pattern;
        Ok(match measure {
            MeasureId::Size => m_size(p),
            MeasureId::RandomWalk => m_random_walk(p),
            MeasureId::Count => InterestScore::single(re.count() as i64),
            MeasureId::Monocount => InterestScore::single(monocount(p, &re.instances) as i64),
            MeasureId::LocalDist => self.local_position(re)?,
            MeasureId::GlobalDist => {
                let d = global_distribution(self.kb, p, self.aggregate, self.sample_size, self.seed)?;
                m_position(aggregate(self.aggregate, re), &d)
            }
            MeasureId::SizeMonocount => m_size(p).then(self.score(MeasureId::Monocount, re)?),
            MeasureId::SizeLocalDist => m_size(p).then(self.local_position(re)?),
        })
    }

    fn local_position(&self, re: &Explanation) -> Result<InterestScore> {
        let d = local_distribution(self.kb, &re.pattern, self.start, self.aggregate)?;
        Ok(m_position(aggregate(self.aggregate, re), &d))
    }
}

/// Lexicographic pair of two measures.
pub fn m_combined(
    primary: MeasureId,
    secondary: MeasureId,
    kb: &KnowledgeBase,
    p: &ExplanationPattern,
    start: EntityId,
    end: EntityId,
) -> Result<InterestScore> {
    let re = Explanation {
        pattern: p.clone(),
        instances: match_instances(kb, p, start, end)?,
        level: 0,
    };
    let scorer = Scorer::new(kb, start, end);
    Ok(scorer.score(primary, &re)?.then(scorer.score(secondary, &re)?))
}
