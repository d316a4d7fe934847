//! Cells of the complete complex on `[n]`, colex ranks and the presence oracle.

use serde::{Deserialize, Serialize};

use crate::error::LmError;

/// A `j`-cell: `j + 1` strictly increasing 1-based vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell(Vec<u32>);

/// Colex rank of a cell among cells of the same dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellRank(pub u64);

impl Cell {
    pub fn new(vertices: Vec<u32>) -> Result<Self, LmError> {
        if vertices.is_empty() {
            return Err(LmError::InvalidCell("empty vertex list".into()));
        }
        if vertices[0] == 0 {
            return Err(LmError::InvalidCell("vertices are 1-based".into()));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LmError::InvalidCell(format!(
                "vertices must be strictly increasing: {vertices:?}"
            )));
        }
        Ok(Cell(vertices))
    }

    /// Sorts and deduplicates-checks an arbitrary vertex list.
    pub fn from_unsorted(mut vertices: Vec<u32>) -> Result<Self, LmError> {
        vertices.sort_unstable();
        Cell::new(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn max_vertex(&self) -> u32 {
        *self.0.last().unwrap()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Facets in order of removed-vertex index.
    pub fn boundary(&self) -> Result<Vec<Cell>, LmError> {
        if self.0.len() < 2 {
            return Err(LmError::InvalidCell("a 0-cell has no facets".into()));
        }
        Ok((0..self.0.len())
            .map(|i| {
                let mut v = self.0.clone();
                v.remove(i);
                Cell(v)
            })
            .collect())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Exact binomial coefficient, `None` on `u128` overflow. `C(n, k) = 0` for `k > n`.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Binomial coefficient that must fit a `u64` rank.
pub fn binomial_u64(n: u64, k: u64) -> Result<u64, LmError> {
    binomial(n, k)
        .and_then(|b| u64::try_from(b).ok())
        .ok_or_else(|| LmError::InvalidParameter(format!("C({n},{k}) overflows u64")))
}

/// Number of `j`-cells on `[n]`.
pub fn cell_count(n: usize, j: usize) -> Result<u64, LmError> {
    binomial_u64(n as u64, j as u64 + 1)
}

/// Table of `C(v, i)` for `v <= n`, `i <= kmax`.
#[derive(Clone, Debug)]
pub struct BinomTable {
    kmax: usize,
    data: Vec<u64>,
}

impl BinomTable {
    pub fn new(n: usize, kmax: usize) -> Result<Self, LmError> {
        let entries = (n + 1).checked_mul(kmax + 1).filter(|&e| e <= 1 << 26);
        let Some(entries) = entries else {
            return Err(LmError::InvalidParameter(format!("rank table for n = {n}, k = {kmax} is too large")));
        };
        let mut data = vec![0u64; entries];
        for v in 0..=n {
            for i in 0..=kmax {
                // saturated entries exceed every valid rank and are never summed
                data[v * (kmax + 1) + i] = if i > v { 0 } else { binomial_u64(v as u64, i as u64).unwrap_or(u64::MAX) };
            }
        }
        Ok(BinomTable { kmax, data })
    }

    #[inline]
    pub fn get(&self, v: u32, i: usize) -> u64 {
        debug_assert!(i <= self.kmax);
        self.data[v as usize * (self.kmax + 1) + i]
    }

    /// Colex rank of a sorted 1-based vertex slice.
    #[inline]
    pub fn rank(&self, vertices: &[u32]) -> u64 {
        vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| self.get(v - 1, i + 1))
            .sum()
    }

    /// Rank of `vertices` with position `skip` removed.
    #[inline]
    pub fn rank_without(&self, vertices: &[u32], skip: usize) -> u64 {
        let mut r = 0;
        for (i, &v) in vertices.iter().enumerate() {
            if i < skip {
                r += self.get(v - 1, i + 1);
            } else if i > skip {
                r += self.get(v - 1, i);
            }
        }
        r
    }
}

pub fn rank_cell(cell: &Cell, n: usize) -> Result<CellRank, LmError> {
    if cell.max_vertex() as usize > n {
        return Err(LmError::InvalidCell(format!("{cell} has a vertex outside [1,{n}]")));
    }
    let mut r: u128 = 0;
    for (i, &v) in cell.vertices().iter().enumerate() {
        r += binomial(v as u64 - 1, i as u64 + 1).unwrap();
    }
    u64::try_from(r)
        .map(CellRank)
        .map_err(|_| LmError::InvalidParameter("rank overflows u64".into()))
}

pub fn unrank_cell(rank: CellRank, j: usize, n: usize) -> Result<Cell, LmError> {
    let total = cell_count(n, j)?;
    if rank.0 >= total {
        return Err(LmError::RankOutOfRange { rank: rank.0, count: total });
    }
    let mut r = rank.0 as u128;
    let mut out = vec![0u32; j + 1];
    let mut hi = n as u64;
    for i in (1..=j + 1).rev() {
        // largest v with C(v - 1, i) <= r
        let (mut lo, mut top) = (i as u64, hi);
        while lo < top {
            let mid = (lo + top + 1) / 2;
            if binomial(mid - 1, i as u64).unwrap() <= r {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        out[i - 1] = lo as u32;
        r -= binomial(lo - 1, i as u64).unwrap();
        hi = lo - 1;
    }
    debug_assert_eq!(r, 0);
    Ok(Cell(out))
}

/// Next `k`-subset of `[n]` in colex order, in place. Returns false after the last one.
pub fn colex_next(v: &mut [u32], n: u32) -> bool {
    let k = v.len();
    for i in 0..k {
        let limit = if i + 1 < k { v[i + 1] } else { n + 1 };
        if v[i] + 1 < limit {
            v[i] += 1;
            for (t, x) in v.iter_mut().enumerate().take(i) {
                *x = t as u32 + 1;
            }
            return true;
        }
    }
    false
}

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash used by the presence rule.
#[inline]
pub fn presence_hash(seed: u64, rank: u64) -> u64 {
    mix64(seed ^ rank.wrapping_mul(GOLDEN_GAMMA))
}

/// `floor(p * 2^64)` as a `u128`, so that `p = 1` maps to `2^64`.
pub fn presence_threshold(p: f64) -> u128 {
    (p * 18_446_744_073_709_551_616.0).floor() as u128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Materialized,
    Lazy,
}

/// A sample of `Y_d(n, p)`: the full `(d-1)`-skeleton plus some `d`-cells.
#[derive(Clone, Debug)]
pub struct ComplexSample {
    n: usize,
    d: usize,
    p: f64,
    seed: u64,
    threshold: u128,
    /// Sorted ranks of present `d`-cells; `None` in lazy mode.
    present: Option<Vec<u64>>,
    table: BinomTable,
}

fn validate_nd(n: usize, d: usize) -> Result<(), LmError> {
    if d < 1 {
        return Err(LmError::InvalidParameter("d must be at least 1".into()));
    }
    if n < d + 1 {
        return Err(LmError::InvalidParameter(format!("n = {n} must be at least d + 1 = {}", d + 1)));
    }
    if n > u32::MAX as usize / 2 {
        return Err(LmError::InvalidParameter("n too large".into()));
    }
    cell_count(n, d)?;
    Ok(())
}

fn validate_p(p: f64) -> Result<(), LmError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(LmError::InvalidParameter(format!("p = {p} is not in [0, 1]")));
    }
    Ok(())
}

pub fn sample_complex(n: usize, d: usize, p: f64, seed: u64, mode: SampleMode) -> Result<ComplexSample, LmError> {
    validate_nd(n, d)?;
    validate_p(p)?;
    let threshold = presence_threshold(p);
    let table = BinomTable::new(n, d + 1)?;
    let present = match mode {
        SampleMode::Lazy => None,
        SampleMode::Materialized => {
            let total = cell_count(n, d)?;
            Some((0..total).filter(|&r| (presence_hash(seed, r) as u128) < threshold).collect())
        }
    };
    Ok(ComplexSample { n, d, p, seed, threshold, present, table })
}

impl ComplexSample {
    /// A materialized complex with an explicit set of present `d`-cells.
    /// `p` and `seed` are carried as metadata only.
    pub fn from_present_ranks(n: usize, d: usize, p: f64, seed: u64, mut ranks: Vec<u64>) -> Result<Self, LmError> {
        validate_nd(n, d)?;
        validate_p(p)?;
        let total = cell_count(n, d)?;
        ranks.sort_unstable();
        if ranks.windows(2).any(|w| w[0] == w[1]) {
            return Err(LmError::Parse("duplicate present rank".into()));
        }
        if let Some(&r) = ranks.last() {
            if r >= total {
                return Err(LmError::RankOutOfRange { rank: r, count: total });
            }
        }
        Ok(ComplexSample {
            n,
            d,
            p,
            seed,
            threshold: presence_threshold(p),
            present: Some(ranks),
            table: BinomTable::new(n, d + 1)?,
        })
    }

    pub fn from_present_cells(n: usize, d: usize, cells: &[Cell]) -> Result<Self, LmError> {
        let mut ranks = Vec::with_capacity(cells.len());
        for c in cells {
            if c.dim() != d {
                return Err(LmError::InvalidCell(format!("{c} is not a {d}-cell")));
            }
            ranks.push(rank_cell(c, n)?.0);
        }
        let total = cell_count(n, d)? as f64;
        Self::from_present_ranks(n, d, cells.len() as f64 / total, 0, ranks)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn mode(&self) -> SampleMode {
        if self.present.is_some() {
            SampleMode::Materialized
        } else {
            SampleMode::Lazy
        }
    }
    pub fn table(&self) -> &BinomTable {
        &self.table
    }

    /// Sorted present ranks, materialized mode only.
    pub fn present_ranks(&self) -> Option<&[u64]> {
        self.present.as_deref()
    }

    #[inline]
    pub fn contains_rank(&self, rank: u64) -> bool {
        match &self.present {
            Some(v) => v.binary_search(&rank).is_ok(),
            None => (presence_hash(self.seed, rank) as u128) < self.threshold,
        }
    }

    pub fn contains_dcell(&self, tau: &Cell) -> Result<bool, LmError> {
        if tau.dim() != self.d {
            return Err(LmError::InvalidCell(format!("{tau} is not a {}-cell", self.d)));
        }
        Ok(self.contains_rank(rank_cell(tau, self.n)?.0))
    }

    /// Number of `(d-1)`-cells, the dimension of the adjacency matrices.
    pub fn dim(&self) -> u64 {
        cell_count(self.n, self.d - 1).unwrap()
    }

    /// Present `d`-cells containing the sorted `(d-1)`-cell `sigma`, as `(added vertex, rank)`.
    pub fn for_each_present_coface(&self, sigma: &[u32], mut f: impl FnMut(u32, u64)) {
        for_each_coface(&self.table, self.n, sigma, |x, r| {
            if self.contains_rank(r) {
                f(x, r)
            }
        });
    }
}

/// Calls `f(x, rank(sigma ∪ {x}))` for every `x` in `[n]` not in `sigma`, in increasing `x`.
pub fn for_each_coface(table: &BinomTable, n: usize, sigma: &[u32], mut f: impl FnMut(u32, u64)) {
    let d = sigma.len();
    // low[q]: vertices below the insertion point keep index; high[q]: the rest shift up
    let mut low = vec![0u64; d + 1];
    let mut high = vec![0u64; d + 1];
    for q in 0..d {
        low[q + 1] = low[q] + table.get(sigma[q] - 1, q + 1);
    }
    for q in (0..d).rev() {
        high[q] = high[q + 1] + table.get(sigma[q] - 1, q + 2);
    }
    let mut q = 0;
    for x in 1..=n as u32 {
        while q < d && sigma[q] < x {
            q += 1;
        }
        if q < d && sigma[q] == x {
            continue;
        }
        f(x, low[q] + table.get(x - 1, q + 1) + high[q]);
    }
}

/// Inserts `x` into sorted `sigma`, returning the new vector and the insertion index.
pub fn insert_sorted(sigma: &[u32], x: u32) -> (Vec<u32>, usize) {
    let q = sigma.partition_point(|&v| v < x);
    let mut tau = Vec::with_capacity(sigma.len() + 1);
    tau.extend_from_slice(&sigma[..q]);
    tau.push(x);
    tau.extend_from_slice(&sigma[q..]);
    (tau, q)
}
