//! Empirical laws of rooted balls and their total-variation distance.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cells::ComplexSample;
use crate::limits::ball::line_graph_ball_rank;
use crate::limits::canon::{ball_signature, BallSignature};
use crate::limits::graph::RootedGraph;
use crate::limits::gw::{sample_dgw, BlockLaw, GwConfig};
use crate::rng::{purpose, substream};
use crate::LmError;

/// Where rooted balls come from.
pub enum BallSource<'a> {
    /// The line graph of one complex, rooted at a uniform `(d-1)`-cell.
    LineGraph(&'a ComplexSample),
    /// Independent block Galton-Watson trees.
    Dgw { d: usize, law: BlockLaw },
}

#[derive(Clone, Copy, Debug)]
pub struct BallOptions {
    pub vertex_cap: usize,
    pub canon_cap: usize,
}

impl Default for BallOptions {
    fn default() -> Self {
        BallOptions { vertex_cap: crate::limits::ball::DEFAULT_VERTEX_CAP, canon_cap: crate::limits::canon::DEFAULT_CANON_CAP }
    }
}

impl BallSource<'_> {
    pub fn ball(&self, t: u32, seed: u64, index: u64, opts: &BallOptions) -> Result<RootedGraph, LmError> {
        match self {
            BallSource::LineGraph(s) => {
                let mut rng = substream(seed, purpose::LINE_BALLS, index);
                let root = rng.random_range(0..s.dim());
                line_graph_ball_rank(s, root, t as usize, opts.vertex_cap)
            }
            BallSource::Dgw { d, law } => {
                let cfg = GwConfig { d: *d, law: *law, depth: t, vertex_cap: opts.vertex_cap };
                sample_dgw(&cfg, seed, index)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BallDistribution {
    pub counts: BTreeMap<BallSignature, u64>,
    pub samples: u64,
}

impl BallDistribution {
    pub fn prob(&self, sig: &BallSignature) -> f64 {
        *self.counts.get(sig).unwrap_or(&0) as f64 / self.samples as f64
    }

    pub fn heuristic_count(&self) -> u64 {
        self.counts.iter().filter(|(k, _)| !k.is_exact()).map(|(_, c)| c).sum()
    }
}

pub fn empirical_ball_distribution(
    source: &BallSource,
    t: u32,
    samples: usize,
    seed: u64,
    opts: &BallOptions,
) -> Result<BallDistribution, LmError> {
    let sigs: Result<Vec<BallSignature>, LmError> = (0..samples as u64)
        .into_par_iter()
        .map(|i| source.ball(t, seed, i, opts).map(|g| ball_signature(&g, opts.canon_cap)))
        .collect();
    let mut dist = BallDistribution { counts: BTreeMap::new(), samples: samples as u64 };
    for s in sigs? {
        *dist.counts.entry(s).or_insert(0) += 1;
    }
    Ok(dist)
}

pub fn tv_distance(a: &BallDistribution, b: &BallDistribution) -> f64 {
    let keys: BTreeSet<&BallSignature> = a.counts.keys().chain(b.counts.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.prob(k) - b.prob(k)).abs()).sum::<f64>()
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureRow {
    pub sig: String,
    pub p_line: f64,
    pub p_dgw: f64,
}

/// The `top` signatures by combined mass.
pub fn top_signatures(line: &BallDistribution, dgw: &BallDistribution, top: usize) -> Vec<SignatureRow> {
    let keys: BTreeSet<&BallSignature> = line.counts.keys().chain(dgw.counts.keys()).collect();
    let mut rows: Vec<(f64, SignatureRow)> = keys
        .into_iter()
        .map(|k| {
            let (a, b) = (line.prob(k), dgw.prob(k));
            (a + b, SignatureRow { sig: k.to_string(), p_line: a, p_dgw: b })
        })
        .collect();
    rows.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.sig.cmp(&y.1.sig)));
    rows.into_iter().take(top).map(|r| r.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_identical_and_disjoint() {
        let mut a = BallDistribution { samples: 2, ..Default::default() };
        a.counts.insert(BallSignature::Exact(vec![1]), 2);
        let mut b = BallDistribution { samples: 4, ..Default::default() };
        b.counts.insert(BallSignature::Exact(vec![1]), 4);
        assert_eq!(tv_distance(&a, &b), 0.0);
        let mut c = BallDistribution { samples: 1, ..Default::default() };
        c.counts.insert(BallSignature::Exact(vec![2]), 1);
        assert_eq!(tv_distance(&a, &c), 1.0);
    }
}
