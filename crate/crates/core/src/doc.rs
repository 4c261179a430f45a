//! Structured (JSON) documents for patterns, explanations and rankings.
//!
//! Field order is fixed by the struct definitions and instance tables use
//! sorted maps, so documents are stable and diffable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::pattern::{ExplanationInstance, ExplanationPattern, PatternEdge, Var};
use crate::rank::RankedEntry;
use crate::pattern::Explanation;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub role: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub label: String,
    pub directed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternDoc {
    pub variables: Vec<VariableDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationDoc {
    pub pattern: PatternDoc,
    pub level: usize,
    pub count: usize,
    /// Variable name to entity name.
    pub instances: Vec<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedDoc {
    pub rank: usize,
    pub score: Vec<String>,
    #[serde(flatten)]
    pub explanation: ExplanationDoc,
}

pub fn pattern_doc(kb: &KnowledgeBase, p: &ExplanationPattern) -> PatternDoc {
    PatternDoc {
        variables: p
            .vars()
            .map(|v| VariableDoc {
                name: v.name(),
                role: match v {
                    Var::START => Some("start".into()),
                    Var::END => Some("end".into()),
                    _ => None,
                },
            })
            .collect(),
        edges: p
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                from: e.from.name(),
                to: e.to.name(),
                label: kb.label_name(e.label).to_string(),
                directed: e.directed,
            })
            .collect(),
    }
}

fn instance_doc(kb: &KnowledgeBase, i: &ExplanationInstance) -> BTreeMap<String, String> {
    i.binding()
        .iter()
        .enumerate()
        .map(|(v, &e)| (Var(v as u8).name(), kb.name(e).to_string()))
        .collect()
}

/// `max_instances` bounds the instance table; the count is always complete.
pub fn explanation_doc(kb: &KnowledgeBase, re: &Explanation, max_instances: usize) -> ExplanationDoc {
    ExplanationDoc {
        pattern: pattern_doc(kb, &re.pattern),
        level: re.level,
        count: re.count(),
        instances: re
            .instances
            .iter()
            .take(max_instances)
            .map(|i| instance_doc(kb, i))
            .collect(),
    }
}

pub fn ranked_docs(kb: &KnowledgeBase, entries: &[RankedEntry], max_instances: usize) -> Vec<RankedDoc> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| RankedDoc {
            rank: i + 1,
            score: e.score.components().iter().map(|r| r.to_string()).collect(),
            explanation: explanation_doc(kb, &e.explanation, max_instances),
        })
        .collect()
}

fn var(name: &str, vars: &[VariableDoc]) -> Result<Var> {
    if !vars.iter().any(|v| v.name == name) {
        return Err(Error::Document(format!("edge references undeclared variable `{name}`")));
    }
    Var::from_name(name).ok_or_else(|| Error::Document(format!("bad variable name `{name}`")))
}

/// Rebuilds a pattern, resolving labels against `kb`.
pub fn read_pattern(kb: &KnowledgeBase, doc: &PatternDoc) -> Result<ExplanationPattern> {
    for v in &doc.variables {
        let parsed = Var::from_name(&v.name).ok_or_else(|| Error::Document(format!("bad variable name `{}`", v.name)))?;
        let expected = match parsed {
            Var::START => Some("start"),
            Var::END => Some("end"),
            _ => None,
        };
        if v.role.as_deref() != expected {
            return Err(Error::Document(format!("variable `{}` has the wrong role", v.name)));
        }
    }
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(PatternEdge::new(
                var(&e.from, &doc.variables)?,
                var(&e.to, &doc.variables)?,
                kb.resolve_label(&e.label)?,
                e.directed,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    ExplanationPattern::new(doc.variables.len(), edges)
}

pub fn read_explanation_doc(text: &str) -> Result<ExplanationDoc> {
    serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
}
