use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::LmError;

/// Undirected simple graph rooted at vertex 0, with BFS depths from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedGraph {
    adj: Vec<Vec<u32>>,
    depth: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RootedGraphJson {
    n_vertices: usize,
    edges: Vec<[u32; 2]>,
    root: u32,
    depths: Vec<u32>,
}

/// BFS distances from 0; `u32::MAX` for unreachable vertices.
fn bfs_depths(adj: &[Vec<u32>]) -> Vec<u32> {
    let mut depth = vec![u32::MAX; adj.len()];
    if adj.is_empty() {
        return depth;
    }
    depth[0] = 0;
    let mut q = VecDeque::from([0u32]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u as usize] {
            if depth[v as usize] == u32::MAX {
                depth[v as usize] = depth[u as usize] + 1;
                q.push_back(v);
            }
        }
    }
    depth
}

impl RootedGraph {
    /// Builds a connected rooted graph; rejects loops, duplicate edges and unreachable vertices.
    pub fn from_edges(n_vertices: usize, edges: &[(u32, u32)]) -> Result<Self, LmError> {
        if n_vertices == 0 {
            return Err(LmError::Parse("a rooted graph needs at least the root".into()));
        }
        let mut adj = vec![Vec::new(); n_vertices];
        for &(a, b) in edges {
            if a as usize >= n_vertices || b as usize >= n_vertices {
                return Err(LmError::Parse(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(LmError::Parse(format!("self-loop at {a}")));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for nb in &mut adj {
            nb.sort_unstable();
            if nb.windows(2).any(|w| w[0] == w[1]) {
                return Err(LmError::Parse("duplicate edge".into()));
            }
        }
        let depth = bfs_depths(&adj);
        if depth.contains(&u32::MAX) {
            return Err(LmError::Parse("graph is not connected to the root".into()));
        }
        Ok(RootedGraph { adj, depth })
    }

    /// From adjacency lists that are already symmetric and connected.
    pub(crate) fn from_adj_unchecked(mut adj: Vec<Vec<u32>>) -> Self {
        for nb in &mut adj {
            nb.sort_unstable();
            nb.dedup();
        }
        let depth = bfs_depths(&adj);
        debug_assert!(!depth.contains(&u32::MAX));
        RootedGraph { adj, depth }
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut e = Vec::with_capacity(self.n_edges());
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb.iter().filter(|&&b| b as usize > a) {
                e.push((a as u32, b));
            }
        }
        e
    }

    /// Induced ball of radius `t` about the root, relabelled in BFS order.
    pub fn truncate(&self, t: u32) -> RootedGraph {
        let mut order: Vec<usize> = (0..self.n_vertices()).filter(|&v| self.depth[v] <= t).collect();
        order.sort_by_key(|&v| (self.depth[v], v));
        let mut new = vec![u32::MAX; self.n_vertices()];
        for (i, &v) in order.iter().enumerate() {
            new[v] = i as u32;
        }
        let adj = order
            .iter()
            .map(|&v| self.adj[v].iter().filter(|&&w| new[w as usize] != u32::MAX).map(|&w| new[w as usize]).collect())
            .collect();
        RootedGraph::from_adj_unchecked(adj)
    }

    pub fn to_json(&self) -> String {
        let j = RootedGraphJson {
            n_vertices: self.n_vertices(),
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            root: 0,
            depths: self.depth.clone(),
        };
        serde_json::to_string(&j).unwrap()
    }

    pub fn from_json(s: &str) -> Result<Self, LmError> {
        let j: RootedGraphJson = serde_json::from_str(s)?;
        if j.root != 0 {
            return Err(LmError::Parse("root must be vertex 0".into()));
        }
        if j.depths.len() != j.n_vertices {
            return Err(LmError::Parse("one depth per vertex required".into()));
        }
        let edges: Vec<(u32, u32)> = j.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = RootedGraph::from_edges(j.n_vertices, &edges)?;
        if g.depth != j.depths {
            return Err(LmError::Parse("depths disagree with BFS distances from the root".into()));
        }
        Ok(g)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph ball {\n");
        for v in 0..self.n_vertices() {
            let shape = if v == 0 { ", shape=doublecircle" } else { "" };
            writeln!(s, "  {v} [label=\"{v}\", depth={}{shape}];", self.depth[v]).unwrap();
        }
        for (a, b) in self.edges() {
            writeln!(s, "  {a} -- {b};").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `(d-1)`-cells.
    V,
    /// `d`-cells.
    U,
}

/// Rooted bipartite graph; vertex 0 is the root and lies on side `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteRootedGraph {
    adj: Vec<Vec<u32>>,
    side: Vec<Side>,
    depth: Vec<u32>,
}

impl BipartiteRootedGraph {
    pub(crate) fn from_parts(mut adj: Vec<Vec<u32>>, side: Vec<Side>) -> Self {
        for nb in &mut adj {
            nb.sort_unstable();
            nb.dedup();
        }
        debug_assert!(side.first() == Some(&Side::V));
        debug_assert!(adj.iter().enumerate().all(|(a, nb)| nb.iter().all(|&b| side[a] != side[b as usize])));
        let depth = bfs_depths(&adj);
        BipartiteRootedGraph { adj, side, depth }
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    /// Children of `v`: neighbours one level deeper.
    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let dv = self.depth[v];
        self.adj[v].iter().map(|&w| w as usize).filter(move |&w| self.depth[w] == dv + 1)
    }

    /// Forgets the sides.
    pub fn as_rooted(&self) -> RootedGraph {
        RootedGraph::from_adj_unchecked(self.adj.clone())
    }

    /// Radius-`t` ball about the root.
    pub fn truncate(&self, t: u32) -> BipartiteRootedGraph {
        let keep: Vec<usize> = (0..self.n_vertices()).filter(|&v| self.depth[v] <= t).collect();
        let mut new = vec![u32::MAX; self.n_vertices()];
        for (i, &v) in keep.iter().enumerate() {
            new[v] = i as u32;
        }
        let adj = keep
            .iter()
            .map(|&v| self.adj[v].iter().filter(|&&w| new[w as usize] != u32::MAX).map(|&w| new[w as usize]).collect())
            .collect();
        let side = keep.iter().map(|&v| self.side[v]).collect();
        BipartiteRootedGraph::from_parts(adj, side)
    }
}

/// `V` vertices, adjacent when they share a `U` neighbour, restricted to the root component.
pub fn phi(g: &BipartiteRootedGraph) -> RootedGraph {
    let nv = g.n_vertices();
    let mut id = vec![u32::MAX; nv];
    let mut order = vec![0usize];
    id[0] = 0;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &u in g.neighbors(v) {
            for &w in g.neighbors(u as usize) {
                let w = w as usize;
                if w == v {
                    continue;
                }
                if id[w] == u32::MAX {
                    id[w] = order.len() as u32;
                    order.push(w);
                    adj.push(Vec::new());
                }
                adj[id[v] as usize].push(id[w]);
            }
        }
    }
    RootedGraph::from_adj_unchecked(adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let g = RootedGraph::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let s = g.to_json();
        assert_eq!(RootedGraph::from_json(&s).unwrap(), g);
        assert_eq!(g.depths(), &[0, 1, 2, 1]);
        assert!(RootedGraph::from_edges(3, &[(0, 1)]).is_err());
        assert!(RootedGraph::from_json(r#"{"n_vertices":2,"edges":[[0,1]],"root":0,"depths":[0,2]}"#).is_err());
    }

    #[test]
    fn truncation() {
        let g = RootedGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let t = g.truncate(2);
        assert_eq!(t.n_vertices(), 3);
        assert_eq!(t.n_edges(), 2);
    }

    #[test]
    fn phi_of_star() {
        // V root - U - two V leaves: one d = 2 block
        let adj = vec![vec![1], vec![0, 2, 3], vec![1], vec![1]];
        let g = BipartiteRootedGraph::from_parts(adj, vec![Side::V, Side::U, Side::V, Side::V]);
        let h = phi(&g);
        assert_eq!(h.n_vertices(), 3);
        assert_eq!(h.n_edges(), 3);
    }
}
