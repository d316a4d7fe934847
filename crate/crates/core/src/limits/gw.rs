//! The block Galton-Watson limit and the Poisson `d`-tree.

use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::limits::graph::{BipartiteRootedGraph, RootedGraph, Side};
use crate::rng::{purpose, substream};
use crate::spectra::mean_stderr;
use crate::LmError;

/// Law of the number of `d`-blocks of children of one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockLaw {
    Poisson(f64),
    Fixed(u64),
}

impl BlockLaw {
    pub fn poisson(lambda: f64) -> Result<Self, LmError> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(LmError::InvalidParameter(format!("lambda = {lambda} must be finite and non-negative")));
        }
        Ok(BlockLaw::Poisson(lambda))
    }

    pub fn sampler(self, rng: ChaCha8Rng) -> BlockSampler {
        let dist = match self {
            BlockLaw::Poisson(l) if l > 0.0 => Some(Poisson::new(l).expect("lambda validated")),
            _ => None,
        };
        BlockSampler { law: self, dist, rng }
    }

    pub fn mean(self) -> f64 {
        match self {
            BlockLaw::Poisson(l) => l,
            BlockLaw::Fixed(k) => k as f64,
        }
    }
}

pub struct BlockSampler {
    law: BlockLaw,
    dist: Option<Poisson<f64>>,
    rng: ChaCha8Rng,
}

impl BlockSampler {
    pub fn next_blocks(&mut self) -> u64 {
        match (self.law, &self.dist) {
            (BlockLaw::Fixed(k), _) => k,
            (_, Some(p)) => p.sample(&mut self.rng) as u64,
            (_, None) => 0,
        }
    }

    /// Total blocks of `m` independent vertices.
    pub fn sum_blocks(&mut self, m: u64) -> u64 {
        match self.law {
            BlockLaw::Fixed(k) => k * m,
            BlockLaw::Poisson(l) if l > 0.0 && m > 0 => Poisson::new(l * m as f64).unwrap().sample(&mut self.rng) as u64,
            BlockLaw::Poisson(_) => 0,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwConfig {
    pub d: usize,
    pub law: BlockLaw,
    /// Generations kept below the root.
    pub depth: u32,
    pub vertex_cap: usize,
}

fn check_d(d: usize) -> Result<(), LmError> {
    if d == 0 {
        return Err(LmError::InvalidParameter("d must be at least 1".into()));
    }
    Ok(())
}

/// Block tree from a block sampler, vertices numbered in BFS order.
///
/// Each vertex of generation below `depth` has `d * B` children, `B` drawn in BFS
/// order; children `d*b + 1 ..= d*b + d` form a clique with their parent.
pub fn sample_dgw_with(d: usize, depth: u32, vertex_cap: usize, blocks: &mut BlockSampler) -> Result<RootedGraph, LmError> {
    check_d(d)?;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut gen = vec![0u32];
    let mut head = 0;
    while head < adj.len() {
        let v = head;
        head += 1;
        if gen[v] >= depth {
            continue;
        }
        for _ in 0..blocks.next_blocks() {
            let first = adj.len();
            if first + d > vertex_cap {
                return Err(LmError::VertexCapExceeded { cap: vertex_cap });
            }
            for i in 0..d {
                let c = first + i;
                let mut nb: Vec<u32> = (first..first + d).filter(|&w| w != c).map(|w| w as u32).collect();
                nb.push(v as u32);
                adj.push(nb);
                gen.push(gen[v] + 1);
                adj[v].push(c as u32);
            }
        }
    }
    Ok(RootedGraph::from_adj_unchecked(adj))
}

pub fn sample_dgw(cfg: &GwConfig, seed: u64, index: u64) -> Result<RootedGraph, LmError> {
    let mut s = cfg.law.sampler(substream(seed, purpose::DGW, index));
    sample_dgw_with(cfg.d, cfg.depth, cfg.vertex_cap, &mut s)
}

/// Bipartite tree: `V` vertices at even depth have `B` children on side `U`,
/// each `U` vertex has exactly `d` children. Truncated at bipartite depth `depth`.
pub fn sample_poisson_dtree_with(
    d: usize,
    depth: u32,
    vertex_cap: usize,
    blocks: &mut BlockSampler,
) -> Result<BipartiteRootedGraph, LmError> {
    check_d(d)?;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut side = vec![Side::V];
    let mut dep = vec![0u32];
    let mut head = 0;
    while head < adj.len() {
        let v = head;
        head += 1;
        if dep[v] >= depth {
            continue;
        }
        let (k, child_side) = match side[v] {
            Side::V => (blocks.next_blocks() as usize, Side::U),
            Side::U => (d, Side::V),
        };
        if adj.len() + k > vertex_cap {
            return Err(LmError::VertexCapExceeded { cap: vertex_cap });
        }
        for _ in 0..k {
            let c = adj.len() as u32;
            adj.push(vec![v as u32]);
            side.push(child_side);
            dep.push(dep[v] + 1);
            adj[v].push(c);
        }
    }
    Ok(BipartiteRootedGraph::from_parts(adj, side))
}

pub fn sample_poisson_dtree(d: usize, lambda: f64, depth: u32, seed: u64, index: u64, vertex_cap: usize) -> Result<BipartiteRootedGraph, LmError> {
    let mut s = BlockLaw::poisson(lambda)?.sampler(substream(seed, purpose::DTREE, index));
    sample_poisson_dtree_with(d, depth, vertex_cap, &mut s)
}

/// `f_k(G, u, v) = 1{u ~ v} 1{deg v = k d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportFn {
    pub k: u64,
}

impl FromStr for TransportFn {
    type Err = LmError;
    /// Ids are `f1`, `f2`, ...
    fn from_str(s: &str) -> Result<Self, LmError> {
        s.strip_prefix('f')
            .and_then(|k| k.parse::<u64>().ok())
            .filter(|&k| k >= 1)
            .map(|k| TransportFn { k })
            .ok_or_else(|| LmError::UnknownTransportFn(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    /// Mean of `sum_v f(G, o, v)`.
    pub lhs: f64,
    /// Mean of `sum_v f(G, v, o)`.
    pub rhs: f64,
    /// Standard error of the paired difference `lhs - rhs`.
    pub stderr: f64,
    pub samples: usize,
}

impl TransportResult {
    pub fn holds(&self, z: f64) -> bool {
        (self.lhs - self.rhs).abs() <= z * self.stderr
    }
}

/// Monte Carlo mass-transport balance of `f` on depth-2 block trees.
pub fn mass_transport_check(d: usize, law: BlockLaw, f: TransportFn, samples: usize, seed: u64) -> Result<TransportResult, LmError> {
    check_d(d)?;
    if samples == 0 {
        return Err(LmError::InvalidParameter("samples must be positive".into()));
    }
    let target = f.k as usize * d;
    let mut lhs = Vec::with_capacity(samples);
    let mut rhs = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut s = law.sampler(substream(seed, purpose::TRANSPORT, i as u64));
        // degrees of the root and its children are complete at depth 2
        let g = sample_dgw_with(d, 2, usize::MAX, &mut s)?;
        let out = g.neighbors(0).iter().filter(|&&v| g.degree(v as usize) == target).count();
        let deg = g.degree(0);
        lhs.push(out as f64);
        rhs.push(if deg == target { deg as f64 } else { 0.0 });
    }
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    Ok(TransportResult {
        lhs: mean_stderr(&lhs).0,
        rhs: mean_stderr(&rhs).0,
        stderr: mean_stderr(&diff).1,
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalResult {
    pub samples: usize,
    pub died_out: usize,
    pub fraction_died: f64,
}

/// Fraction of block trees that go extinct before reaching generation
/// `depth_cap` or `vertex_cap` vertices; hitting a cap counts as survival.
pub fn survival_fraction(
    d: usize,
    law: BlockLaw,
    depth_cap: u32,
    vertex_cap: u64,
    samples: usize,
    seed: u64,
) -> Result<SurvivalResult, LmError> {
    check_d(d)?;
    if samples == 0 {
        return Err(LmError::InvalidParameter("samples must be positive".into()));
    }
    let mut died = 0;
    for i in 0..samples {
        let mut s = law.sampler(substream(seed, purpose::SURVIVAL, i as u64));
        let (mut z, mut total) = (1u64, 1u64);
        let mut extinct = false;
        for _ in 0..depth_cap {
            // a generation's block count is the sum over its vertices
            z = d as u64 * s.sum_blocks(z);
            total += z;
            if z == 0 {
                extinct = true;
                break;
            }
            if total > vertex_cap {
                break;
            }
        }
        if extinct {
            died += 1;
        }
    }
    Ok(SurvivalResult { samples, died_out: died, fraction_died: died as f64 / samples as f64 })
}

/// `(A^j)_{oo}` for `j = 0..=k_max`.
pub fn root_spectral_moments(g: &RootedGraph, k_max: u32) -> Vec<f64> {
    let n = g.n_vertices();
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    let mut out = vec![1.0];
    for _ in 0..k_max {
        let mut y = vec![0.0; n];
        for (v, yv) in y.iter_mut().enumerate() {
            *yv = g.neighbors(v).iter().map(|&w| x[w as usize]).sum();
        }
        x = y;
        out.push(x[0]);
    }
    out
}

/// Mean of `(A^k)_{oo}` over block trees truncated at generation `ceil(k/2)`.
pub fn dgw_root_moment(d: usize, law: BlockLaw, k: u32, samples: usize, seed: u64, vertex_cap: usize) -> Result<(f64, f64), LmError> {
    let cfg = GwConfig { d, law, depth: k.div_ceil(2), vertex_cap };
    let mut vals = Vec::with_capacity(samples);
    for i in 0..samples {
        let g = sample_dgw(&cfg, seed, i as u64)?;
        vals.push(root_spectral_moments(&g, k)[k as usize]);
    }
    Ok(mean_stderr(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_law_tree_shape() {
        let mut s = BlockLaw::Fixed(2).sampler(substream(0, 0, 0));
        let g = sample_dgw_with(3, 1, 1000, &mut s).unwrap();
        assert_eq!(g.n_vertices(), 7);
        // two triangles through the root, each block a 4-clique
        assert_eq!(g.n_edges(), 12);
        assert!(g.has_edge(1, 3) && !g.has_edge(3, 4));
    }

    #[test]
    fn cap_aborts() {
        let mut s = BlockLaw::Fixed(3).sampler(substream(0, 0, 0));
        assert!(matches!(sample_dgw_with(2, 20, 1000, &mut s), Err(LmError::VertexCapExceeded { .. })));
    }

    #[test]
    fn transport_ids() {
        assert_eq!("f2".parse::<TransportFn>().unwrap().k, 2);
        assert!(matches!("g1".parse::<TransportFn>(), Err(LmError::UnknownTransportFn(_))));
        assert!("f0".parse::<TransportFn>().is_err());
    }

    #[test]
    fn root_moments_of_path() {
        let g = RootedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(root_spectral_moments(&g, 4), vec![1.0, 0.0, 1.0, 0.0, 2.0]);
    }
}
