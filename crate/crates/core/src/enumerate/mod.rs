//! Minimal explanation enumeration.
//!
//! [`general_enum`] enumerates path explanations up to `n - 1` edges and
//! unions them into every minimal explanation of at most `n` variables.
//! [`naive_enum`] is the baseline that grows arbitrary patterns edge by edge
//! and filters for minimality; it serves as the oracle for the union
//! algorithms.

mod merge;
mod naive;
mod union;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use merge::{duplicated, merge, partial_mappings, PartialMapping};
pub use naive::naive_enum;
pub use union::{path_union, path_union_basic, path_union_prune, Derivation, ExpandAll, ExpansionFilter, UnionOutput};

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase};
use crate::pathenum::{path_enum, PathCounters, PathStrategy};
use crate::pattern::Explanation;

pub const DEFAULT_MAX_EXPLANATIONS: usize = 100_000;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum UnionStrategy {
    Basic,
    #[default]
    Prune,
}

impl fmt::Display for UnionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnionStrategy::Basic => "basic",
            UnionStrategy::Prune => "prune",
        })
    }
}

impl FromStr for UnionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(UnionStrategy::Basic),
            "prune" => Ok(UnionStrategy::Prune),
            other => Err(Error::Config(format!("unknown union strategy `{other}`"))),
        }
    }
}

/// A path enumerator paired with a union algorithm, written `path+union`
/// (for example `prioritized+prune`).
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EnumStrategy {
    pub path: PathStrategy,
    pub union: UnionStrategy,
}

impl EnumStrategy {
    pub fn new(path: PathStrategy, union: UnionStrategy) -> Self {
        EnumStrategy { path, union }
    }

    /// All six combinations.
    pub fn all() -> Vec<EnumStrategy> {
        PathStrategy::ALL
            .iter()
            .flat_map(|&p| [UnionStrategy::Basic, UnionStrategy::Prune].map(|u| EnumStrategy::new(p, u)))
            .collect()
    }
}

impl fmt::Display for EnumStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.path, self.union)
    }
}

impl FromStr for EnumStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (path, union) = s
            .split_once('+')
            .ok_or_else(|| Error::Config(format!("strategy `{s}` is not of the form path+union")))?;
        Ok(EnumStrategy::new(path.parse()?, union.parse()?))
    }
}

#[derive(Clone, Debug)]
pub struct EnumOptions {
    /// Hard cap on the number of explanations (and, for the naive
    /// enumerator, of distinct patterns visited); exceeding it is an error.
    pub max_explanations: usize,
    /// Run independent merges of a round on the rayon pool.
    pub parallel: bool,
    /// Wall-clock budget for the whole call.
    pub time_budget: Option<Duration>,
    /// Record every merge result as a [`Derivation`].
    pub record_derivations: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            max_explanations: DEFAULT_MAX_EXPLANATIONS,
            parallel: false,
            time_budget: None,
            record_derivations: false,
        }
    }
}

/// Deadline derived from [`EnumOptions::time_budget`].
#[derive(Copy, Clone, Debug)]
pub(crate) struct Deadline {
    at: Option<(Instant, Duration)>,
}

impl Deadline {
    pub(crate) fn new(budget: Option<Duration>) -> Self {
        Deadline {
            at: budget.map(|b| (Instant::now() + b, b)),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        match self.at {
            Some((at, budget)) if Instant::now() >= at => Err(Error::Timeout(budget)),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumCounters {
    pub path: PathCounters,
    pub merge_calls: u64,
    pub mappings: u64,
    pub duplicates: u64,
    pub rounds: u64,
    /// Patterns expanded by the naive enumerator.
    pub patterns_expanded: u64,
}

#[derive(Clone, Debug)]
pub struct EnumOutput {
    pub explanations: Vec<Explanation>,
    pub counters: EnumCounters,
    pub derivations: Vec<Derivation>,
}

/// Path enumeration followed by path union.
pub fn general_enum(
    kb: &KnowledgeBase,
    start: EntityId,
    end: EntityId,
    n: usize,
    strategy: EnumStrategy,
    opts: &EnumOptions,
) -> Result<EnumOutput> {
    general_enum_with(kb, start, end, n, strategy, opts, &mut ExpandAll)
}

/// [`general_enum`] with a caller-supplied filter deciding which explanations
/// of each round are expanded further.
pub fn general_enum_with(
    kb: &KnowledgeBase,
    start: EntityId,
    end: EntityId,
    n: usize,
    strategy: EnumStrategy,
    opts: &EnumOptions,
    filter: &mut dyn ExpansionFilter,
) -> Result<EnumOutput> {
    if n < 2 {
        return Err(Error::Config(format!("pattern size limit must be at least 2, got {n}")));
    }
    let paths = path_enum(kb, start, end, n - 1, strategy.path)?;
    let union = path_union(&paths.explanations, n, strategy.union, opts, filter)?;
    let mut counters = union.counters;
    counters.path = paths.counters;
    Ok(EnumOutput {
        explanations: union.explanations,
        counters,
        derivations: union.derivations,
    })
}
