//! Synthetic knowledge bases.
//!
//! Edges are drawn Chung-Lu style: each endpoint is picked with probability
//! proportional to a per-node weight, so the expected degree of node `i` is
//! proportional to `w_i`. Uniform weights give an Erdos-Renyi-like graph;
//! power-law weights give heavy-tailed degrees.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum DegreeShape {
    Uniform,
    /// Degree exponent, greater than 2.
    PowerLaw(f64),
}

impl FromStr for DegreeShape {
    type Err = Error;

    /// `uniform` or `power-law:EXP`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(DegreeShape::Uniform);
        }
        if let Some(exp) = s.strip_prefix("power-law:") {
            let exp: f64 = exp
                .parse()
                .map_err(|_| Error::Config(format!("bad power-law exponent `{exp}`")))?;
            return Ok(DegreeShape::PowerLaw(exp));
        }
        if s == "power-law" {
            return Ok(DegreeShape::PowerLaw(2.5));
        }
        Err(Error::Config(format!("unknown degree shape `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub nodes: usize,
    pub labels: usize,
    /// Fraction of labels that are undirected.
    pub undirected_fraction: f64,
    pub avg_degree: f64,
    pub shape: DegreeShape,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            nodes: 1000,
            labels: 8,
            undirected_fraction: 0.25,
            avg_degree: 6.0,
            shape: DegreeShape::PowerLaw(2.5),
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::Config("a generated graph needs at least 2 nodes".into()));
        }
        if self.labels == 0 {
            return Err(Error::Config("at least one label is required".into()));
        }
        if !(0.0..=1.0).contains(&self.undirected_fraction) {
            return Err(Error::Config("undirected fraction must lie in [0, 1]".into()));
        }
        if !(self.avg_degree > 0.0) || self.avg_degree > (self.nodes - 1) as f64 {
            return Err(Error::Config(format!(
                "average degree must be positive and below {}",
                self.nodes - 1
            )));
        }
        if let DegreeShape::PowerLaw(exp) = self.shape {
            if !(exp > 2.0) {
                return Err(Error::Config(format!("power-law exponent must exceed 2, got {exp}")));
            }
        }
        Ok(())
    }
}

/// Generates a KB in the text format: nodes `n0..`, labels `r0..`, the first
/// `round(labels * undirected_fraction)` labels undirected. Nodes without
/// edges are declared on their own lines.
pub fn generate(spec: &GenSpec) -> Result<String> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.nodes;
    let weights: Vec<f64> = match spec.shape {
        DegreeShape::Uniform => vec![1.0; n],
        DegreeShape::PowerLaw(exp) => {
            let beta = 1.0 / (exp - 1.0);
            (0..n).map(|i| ((i + 1) as f64).powf(-beta)).collect()
        }
    };
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::Config(e.to_string()))?;
    let undirected = (spec.labels as f64 * spec.undirected_fraction).round() as usize;
    let target = ((n as f64 * spec.avg_degree) / 2.0).round() as usize;

    let mut seen: HashSet<(usize, usize, usize)> = HashSet::with_capacity(target);
    let mut edges: Vec<(usize, usize, usize)> = Vec::with_capacity(target);
    let mut touched = vec![false; n];
    let mut attempts = 0usize;
    while edges.len() < target && attempts < target * 50 {
        attempts += 1;
        let (mut a, mut b) = (pick.sample(&mut rng), pick.sample(&mut rng));
        if a == b {
            continue;
        }
        let label = rng.gen_range(0..spec.labels);
        if label < undirected && b < a {
            std::mem::swap(&mut a, &mut b);
        }
        if seen.insert((a, b, label)) {
            edges.push((a, b, label));
            touched[a] = true;
            touched[b] = true;
        }
    }
    if edges.len() < target {
        log::warn!("generated {} of {} requested edges", edges.len(), target);
    }

    let mut out = String::new();
    for (a, b, label) in edges {
        let flag = if label < undirected { 'U' } else { 'D' };
        writeln!(out, "n{a}\tr{label}\tn{b}\t{flag}").unwrap();
    }
    for (i, _) in touched.iter().enumerate().filter(|(_, t)| !**t) {
        writeln!(out, "n{i}").unwrap();
    }
    Ok(out)
}
