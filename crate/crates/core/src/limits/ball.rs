//! Neighbourhoods of a `(d-1)`-cell, found through presence queries only.

use std::collections::HashMap;

use crate::adjacency::parity_sign;
use crate::cells::{insert_sorted, rank_cell, unrank_cell, Cell, CellRank, ComplexSample};
use crate::limits::graph::{BipartiteRootedGraph, RootedGraph, Side};
use crate::LmError;

pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

/// Line-graph ball with the signed entry on each edge. Local vertex 0 is the root.
#[derive(Clone, Debug)]
pub struct LocalBall {
    pub ranks: Vec<u64>,
    pub cells: Vec<Vec<u32>>,
    pub depth: Vec<u32>,
    pub adj: Vec<Vec<(u32, f64)>>,
}

/// Calls `f(neighbour rank, neighbour cell, signed entry)` for every line-graph neighbour.
fn for_each_neighbor(sample: &ComplexSample, sigma: &[u32], mut f: impl FnMut(u64, Vec<u32>, f64)) {
    let table = sample.table();
    sample.for_each_present_coface(sigma, |x, _| {
        let (tau, q) = insert_sorted(sigma, x);
        for j in (0..tau.len()).filter(|&j| j != q) {
            let mut c = tau.clone();
            c.remove(j);
            f(table.rank_without(&tau, j), c, parity_sign(q, j));
        }
    });
}

/// BFS ball of radius `radius` about the `(d-1)`-cell of rank `root`.
///
/// Every edge with an endpoint at depth below `radius` is present. Edges between
/// two boundary vertices are added only when `close_boundary` is set.
pub fn explore(
    sample: &ComplexSample,
    root: u64,
    radius: usize,
    close_boundary: bool,
    vertex_cap: usize,
) -> Result<LocalBall, LmError> {
    let (n, d) = (sample.n(), sample.d());
    let root_cell = unrank_cell(CellRank(root), d - 1, n)?.vertices().to_vec();
    let mut ball = LocalBall { ranks: vec![root], cells: vec![root_cell], depth: vec![0], adj: vec![Vec::new()] };
    let mut index: HashMap<u64, u32> = HashMap::from([(root, 0)]);
    let mut head = 0;
    while head < ball.ranks.len() {
        let u = head;
        head += 1;
        let du = ball.depth[u];
        if du as usize >= radius {
            continue;
        }
        let sigma = ball.cells[u].clone();
        let mut found = Vec::new();
        for_each_neighbor(sample, &sigma, |r, c, s| found.push((r, c, s)));
        for (r, c, s) in found {
            let v = match index.get(&r) {
                Some(&v) => v,
                None => {
                    if ball.ranks.len() >= vertex_cap {
                        return Err(LmError::VertexCapExceeded { cap: vertex_cap });
                    }
                    let v = ball.ranks.len() as u32;
                    index.insert(r, v);
                    ball.ranks.push(r);
                    ball.cells.push(c);
                    ball.depth.push(du + 1);
                    ball.adj.push(Vec::new());
                    v
                }
            };
            ball.adj[u].push((v, s));
            // boundary vertices are never expanded, so record the reverse edge here
            if ball.depth[v as usize] as usize >= radius {
                ball.adj[v as usize].push((u as u32, s));
            }
        }
    }
    if close_boundary {
        let boundary: Vec<usize> = (0..ball.ranks.len()).filter(|&v| ball.depth[v] as usize == radius).collect();
        for v in boundary {
            let sigma = ball.cells[v].clone();
            let mut extra = Vec::new();
            for_each_neighbor(sample, &sigma, |r, _, s| {
                if let Some(&w) = index.get(&r) {
                    if ball.depth[w as usize] as usize == radius {
                        extra.push((w, s));
                    }
                }
            });
            ball.adj[v].extend(extra);
        }
    }
    Ok(ball)
}

/// Induced radius-`t` ball about `root` in the line graph of the complex.
pub fn line_graph_ball(sample: &ComplexSample, root: &Cell, t: usize, vertex_cap: usize) -> Result<RootedGraph, LmError> {
    if root.dim() + 1 != sample.d() {
        return Err(LmError::InvalidCell(format!("{root} is not a {}-cell", sample.d() - 1)));
    }
    let r = rank_cell(root, sample.n())?.0;
    line_graph_ball_rank(sample, r, t, vertex_cap)
}

pub fn line_graph_ball_rank(sample: &ComplexSample, root: u64, t: usize, vertex_cap: usize) -> Result<RootedGraph, LmError> {
    let ball = explore(sample, root, t, true, vertex_cap)?;
    let adj = ball.adj.into_iter().map(|nb| nb.into_iter().map(|(v, _)| v).collect()).collect();
    Ok(RootedGraph::from_adj_unchecked(adj))
}

/// Radius-`t` ball about the `(d-1)`-cell `root` in the `(d-1)`/`d`-cell incidence graph.
pub fn bipartite_ball(
    sample: &ComplexSample,
    root: &Cell,
    t: usize,
    vertex_cap: usize,
) -> Result<BipartiteRootedGraph, LmError> {
    if root.dim() + 1 != sample.d() {
        return Err(LmError::InvalidCell(format!("{root} is not a {}-cell", sample.d() - 1)));
    }
    let table = sample.table();
    // keys: (side, rank)
    let mut index: HashMap<(bool, u64), u32> = HashMap::new();
    let mut cells: Vec<Vec<u32>> = vec![root.vertices().to_vec()];
    let mut side = vec![Side::V];
    let mut depth = vec![0usize];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    index.insert((false, rank_cell(root, sample.n())?.0), 0);
    let mut head = 0;
    while head < cells.len() {
        let u = head;
        head += 1;
        if depth[u] >= t {
            continue;
        }
        let c = cells[u].clone();
        let mut found: Vec<((bool, u64), Vec<u32>)> = Vec::new();
        match side[u] {
            Side::V => sample.for_each_present_coface(&c, |x, r| found.push(((true, r), insert_sorted(&c, x).0))),
            Side::U => {
                for j in 0..c.len() {
                    let mut f = c.clone();
                    f.remove(j);
                    found.push(((false, table.rank_without(&c, j)), f));
                }
            }
        }
        for (key, cell) in found {
            let v = match index.get(&key) {
                Some(&v) => v,
                None => {
                    if cells.len() >= vertex_cap {
                        return Err(LmError::VertexCapExceeded { cap: vertex_cap });
                    }
                    let v = cells.len() as u32;
                    index.insert(key, v);
                    cells.push(cell);
                    side.push(if key.0 { Side::U } else { Side::V });
                    depth.push(depth[u] + 1);
                    adj.push(Vec::new());
                    v
                }
            };
            // adjacent vertices of a bipartite graph sit on consecutive levels
            adj[u].push(v);
            if depth[v as usize] >= t {
                adj[v as usize].push(u as u32);
            }
        }
    }
    Ok(BipartiteRootedGraph::from_parts(adj, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{sample_complex, SampleMode};

    #[test]
    fn single_triangle_ball() {
        let s = ComplexSample::from_present_cells(5, 2, &[Cell::new(vec![1, 2, 3]).unwrap()]).unwrap();
        let g = line_graph_ball(&s, &Cell::new(vec![1, 2]).unwrap(), 2, 100).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.n_edges(), 3);
        let g = line_graph_ball(&s, &Cell::new(vec![4, 5]).unwrap(), 2, 100).unwrap();
        assert_eq!(g.n_vertices(), 1);
    }

    #[test]
    fn ball_is_induced() {
        let s = sample_complex(12, 2, 0.15, 9, SampleMode::Materialized).unwrap();
        let a = crate::adjacency::build_adjacency(&s, crate::adjacency::MatrixKind::Unsigned).unwrap();
        for root in 0..20u64 {
            let b = explore(&s, root, 2, true, 10_000).unwrap();
            for u in 0..b.ranks.len() {
                let mut want: Vec<u64> = a
                    .row(b.ranks[u] as usize)
                    .map(|(c, _)| c as u64)
                    .filter(|c| b.ranks.contains(c))
                    .collect();
                let mut got: Vec<u64> = b.adj[u].iter().map(|&(v, _)| b.ranks[v as usize]).collect();
                want.sort_unstable();
                got.sort_unstable();
                assert_eq!(got, want);
            }
        }
    }
}
