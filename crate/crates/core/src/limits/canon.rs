//! Canonical forms of rooted graphs by individualization-refinement.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cells::mix64;
use crate::limits::graph::RootedGraph;
use crate::LmError;

pub const DEFAULT_CANON_CAP: usize = 64;

/// Isomorphism-class key of a rooted graph.
///
/// `Exact` keys are equal iff the graphs are rooted-isomorphic. `Heuristic` keys
/// come from colour refinement and may merge distinct classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BallSignature {
    Exact(Vec<u8>),
    Heuristic(Vec<u8>),
}

impl BallSignature {
    pub fn is_exact(&self) -> bool {
        matches!(self, BallSignature::Exact(_))
    }
}

impl fmt::Display for BallSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BallSignature::Exact(b) => write!(f, "x{}", hex::encode(b)),
            BallSignature::Heuristic(b) => write!(f, "h{}", hex::encode(b)),
        }
    }
}

/// Colours are dense ranks `0..cells`; returns the number of cells.
fn refine(adj: &[Vec<u32>], colors: &mut [u32]) -> usize {
    let n = colors.len();
    let mut cells = count_cells(colors);
    let mut keys: Vec<(u32, Vec<u32>, usize)> = Vec::with_capacity(n);
    loop {
        keys.clear();
        for v in 0..n {
            let mut nb: Vec<u32> = adj[v].iter().map(|&w| colors[w as usize]).collect();
            nb.sort_unstable();
            keys.push((colors[v], nb, v));
        }
        keys.sort_unstable();
        let mut c = 0u32;
        for i in 0..n {
            if i > 0 && (keys[i].0 != keys[i - 1].0 || keys[i].1 != keys[i - 1].1) {
                c += 1;
            }
            colors[keys[i].2] = c;
        }
        let now = c as usize + 1;
        if now == cells {
            return cells;
        }
        cells = now;
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Splits `v` off its cell, ahead of the rest of the cell.
fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    colors.iter().enumerate().map(|(u, &c)| if u == v { 2 * c } else { 2 * c + 1 }).collect()
}

struct Leaf {
    cert: Vec<u32>,
    /// `perm[v]` is the canonical position of `v`.
    perm: Vec<u32>,
    path: Vec<u32>,
}

struct Search<'a> {
    adj: &'a [Vec<u32>],
    n: usize,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<u32>>,
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Search<'_> {
    fn certificate(&self, perm: &[u32]) -> Vec<u32> {
        let n = self.n as u32;
        let mut cert: Vec<u32> = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb {
                let (x, y) = (perm[a], perm[b as usize]);
                if x < y {
                    cert.push(x * n + y);
                }
            }
        }
        cert.sort_unstable();
        cert
    }

    fn automorphism(&mut self, leaf_perm: &[u32], other: &[u32]) {
        let mut inv = vec![0u32; self.n];
        for (v, &p) in other.iter().enumerate() {
            inv[p as usize] = v as u32;
        }
        let gamma: Vec<u32> = leaf_perm.iter().map(|&p| inv[p as usize]).collect();
        if gamma.iter().enumerate().any(|(v, &g)| g as usize != v) {
            self.generators.push(gamma);
        }
    }

    /// Orbit representative of `v` under stored generators fixing `path` pointwise.
    fn orbits(&self, path: &[u32]) -> Vec<u32> {
        let mut parent: Vec<u32> = (0..self.n as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for g in &self.generators {
            if path.iter().all(|&v| g[v as usize] == v) {
                for v in 0..self.n as u32 {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, g[v as usize]));
                    if a != b {
                        parent[a.max(b) as usize] = a.min(b);
                    }
                }
            }
        }
        (0..self.n as u32).map(|v| find(&mut parent, v)).collect()
    }

    /// Returns the depth to jump back to, if an automorphism prunes this subtree.
    fn search(&mut self, colors: Vec<u32>, cells: usize, path: &mut Vec<u32>) -> Option<usize> {
        if cells == self.n {
            let cert = self.certificate(&colors);
            let leaf = Leaf { cert, perm: colors, path: path.clone() };
            let Some(first) = &self.first else {
                self.best = Some(Leaf { cert: leaf.cert.clone(), perm: leaf.perm.clone(), path: leaf.path.clone() });
                self.first = Some(leaf);
                return None;
            };
            if leaf.cert == first.cert {
                let (fp, fpath) = (first.perm.clone(), first.path.clone());
                self.automorphism(&leaf.perm, &fp);
                return Some(common_prefix(&leaf.path, &fpath));
            }
            let best = self.best.as_ref().unwrap();
            match leaf.cert.cmp(&best.cert) {
                std::cmp::Ordering::Equal => {
                    let (bp, bpath) = (best.perm.clone(), best.path.clone());
                    self.automorphism(&leaf.perm, &bp);
                    return Some(common_prefix(&leaf.path, &bpath));
                }
                std::cmp::Ordering::Less => self.best = Some(leaf),
                std::cmp::Ordering::Greater => {}
            }
            return None;
        }
        let depth = path.len();
        let mut count = vec![0usize; cells];
        for &c in &colors {
            count[c as usize] += 1;
        }
        let target = (0..cells).find(|&c| count[c] > 1).unwrap() as u32;
        let members: Vec<usize> = (0..self.n).filter(|&v| colors[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for v in members {
            if !tried.is_empty() {
                let orb = self.orbits(path);
                if tried.iter().any(|&u| orb[u] == orb[v]) {
                    continue;
                }
            }
            tried.push(v);
            let mut child = individualize(&colors, v);
            let c = refine(self.adj, &mut child);
            path.push(v as u32);
            let r = self.search(child, c, path);
            path.pop();
            if let Some(j) = r {
                if j < depth {
                    return Some(j);
                }
            }
        }
        None
    }
}

/// Canonical certificate: the vertex count followed by the canonically
/// relabelled sorted edge list, 16-bit little-endian.
pub fn canonical_signature(g: &RootedGraph, cap: usize) -> Result<Vec<u8>, LmError> {
    let n = g.n_vertices();
    if n > cap || n > u16::MAX as usize {
        return Err(LmError::CanonCapExceeded { size: n, cap });
    }
    let adj: Vec<Vec<u32>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let mut colors: Vec<u32> = (0..n).map(|v| u32::from(v != 0)).collect();
    let cells = refine(&adj, &mut colors);
    let mut s = Search { adj: &adj, n, first: None, best: None, generators: Vec::new() };
    s.search(colors, cells, &mut Vec::new());
    let best = s.best.expect("search reaches a leaf");
    let mut out = Vec::with_capacity(2 + 4 * best.cert.len());
    out.extend_from_slice(&(n as u16).to_le_bytes());
    for e in best.cert {
        let (a, b) = (e / n as u32, e % n as u32);
        out.extend_from_slice(&(a as u16).to_le_bytes());
        out.extend_from_slice(&(b as u16).to_le_bytes());
    }
    Ok(out)
}

/// Hashed colour refinement from the root; equal for isomorphic rooted graphs.
pub fn heuristic_signature(g: &RootedGraph) -> Vec<u8> {
    let n = g.n_vertices();
    let mut h: Vec<u64> = (0..n).map(|v| if v == 0 { 0x5EED } else { 1 }).collect();
    let mut classes = 0;
    for _ in 0..=n {
        let next: Vec<u64> = (0..n)
            .map(|v| {
                let mut nb: Vec<u64> = g.neighbors(v).iter().map(|&w| h[w as usize]).collect();
                nb.sort_unstable();
                nb.iter().fold(mix64(h[v]), |acc, &x| mix64(acc ^ x.wrapping_add(0x9E37_79B9)))
            })
            .collect();
        h = next;
        let mut c = h.clone();
        c.sort_unstable();
        c.dedup();
        if c.len() == classes {
            break;
        }
        classes = c.len();
    }
    let mut all = h.clone();
    all.sort_unstable();
    let digest = all.iter().fold(mix64(n as u64), |acc, &x| mix64(acc ^ x));
    let mut out = Vec::with_capacity(24);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&h[0].to_le_bytes());
    out.extend_from_slice(&digest.to_le_bytes());
    out
}

/// Exact signature up to `cap` vertices, heuristic beyond.
pub fn ball_signature(g: &RootedGraph, cap: usize) -> BallSignature {
    match canonical_signature(g, cap) {
        Ok(b) => BallSignature::Exact(b),
        Err(_) => BallSignature::Heuristic(heuristic_signature(g)),
    }
}
