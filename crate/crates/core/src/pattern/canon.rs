use std::fmt;

use super::{ExplanationPattern, PatternEdge, Var};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_VARS: usize = 5;

/// Isomorphism-invariant key of a pattern. Targets stay fixed; non-target
/// variables are relabeled by the permutation giving the smallest edge list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    num_vars: u8,
    edges: Vec<(u8, u8, u32, bool)>,
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.num_vars)?;
        for (i, (a, b, label, directed)) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let arrow = if *directed { '>' } else { '-' };
            write!(f, "{a}{arrow}{b}#{label}")?;
        }
        Ok(())
    }
}

/// Canonical form of `p`, refusing patterns larger than `max_vars`.
pub fn canonical_form(p: &ExplanationPattern, max_vars: usize) -> Result<CanonicalForm> {
    if p.num_vars() > max_vars {
        return Err(Error::PatternTooLarge {
            vars: p.num_vars(),
            limit: max_vars,
        });
    }
    Ok(canonical_labeling(p).0)
}

fn relabel_into(edges: &[PatternEdge], perm: &[u8], out: &mut Vec<(u8, u8, u32, bool)>) {
    out.clear();
    out.extend(edges.iter().map(|e| {
        let e = e.renamed(|v| Var(perm[v.index()]));
        (e.from.0, e.to.0, e.label.0, e.directed)
    }));
    out.sort_unstable();
}

/// Advances `xs` to the next lexicographic permutation; false after the last.
fn next_permutation(xs: &mut [u8]) -> bool {
    let Some(i) = xs.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = xs.iter().rposition(|&x| x > xs[i]).unwrap();
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

/// The canonical form together with the permutation (`perm[old] = new`) that produces it.
pub(crate) fn canonical_labeling(p: &ExplanationPattern) -> (CanonicalForm, Vec<u8>) {
    let n = p.num_vars();
    let identity: Vec<u8> = (0..n as u8).collect();
    let mut best_perm = identity.clone();
    let mut best = Vec::with_capacity(p.edges().len());
    relabel_into(p.edges(), &identity, &mut best);
    if n > 3 {
        let mut perm = identity;
        let mut candidate = Vec::with_capacity(best.len());
        while next_permutation(&mut perm[2..]) {
            relabel_into(p.edges(), &perm, &mut candidate);
            if candidate < best {
                std::mem::swap(&mut best, &mut candidate);
                best_perm.copy_from_slice(&perm);
            }
        }
    }
    (
        CanonicalForm {
            num_vars: n as u8,
            edges: best,
        },
        best_perm,
    )
}
