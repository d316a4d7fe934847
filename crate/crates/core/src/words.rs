//! Closed words in the `(d-1)`-cells and the moment polynomials they count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::Cell;
use crate::spectra::catalan;
use crate::LmError;

/// Largest `k` accepted by the enumerators.
pub const MAX_ENUM_K: usize = 16;

/// Letters `sigma_1 .. sigma_{k+1}`; consecutive letters span a `d`-cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    d: usize,
    letters: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSupports {
    pub supp0: BTreeSet<u32>,
    /// `N_w(tau)` for every `tau` in `supp_d(w)`.
    pub crossings: BTreeMap<Cell, u32>,
}

impl WordSupports {
    pub fn suppd_len(&self) -> usize {
        self.crossings.len()
    }
}

/// Pairs `(r_i, s_i)`: first-appearance indices of the dropped and the added
/// vertex at step i.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalLabel(pub Vec<(u32, u32)>);

fn step(a: &Cell, b: &Cell) -> Option<(u32, u32)> {
    let dropped: Vec<u32> = a.vertices().iter().copied().filter(|v| !b.contains(*v)).collect();
    let added: Vec<u32> = b.vertices().iter().copied().filter(|v| !a.contains(*v)).collect();
    match (dropped.as_slice(), added.as_slice()) {
        ([x], [y]) => Some((*x, *y)),
        _ => None,
    }
}

impl Word {
    pub fn new(d: usize, letters: Vec<Cell>) -> Result<Self, LmError> {
        if d < 1 {
            return Err(LmError::InvalidParameter("d must be at least 1".into()));
        }
        if letters.is_empty() {
            return Err(LmError::Parse("a word needs at least one letter".into()));
        }
        if let Some(c) = letters.iter().find(|c| c.dim() + 1 != d) {
            return Err(LmError::InvalidCell(format!("{c} is not a {}-cell", d - 1)));
        }
        if let Some(w) = letters.windows(2).find(|w| step(&w[0], &w[1]).is_none()) {
            return Err(LmError::InvalidCell(format!("{}{} do not span a {d}-cell", w[0], w[1])));
        }
        Ok(Word { d, letters })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn letters(&self) -> &[Cell] {
        &self.letters
    }

    /// Number of steps.
    pub fn k(&self) -> usize {
        self.letters.len() - 1
    }

    pub fn is_closed(&self) -> bool {
        self.letters.first() == self.letters.last()
    }

    pub fn supports(&self) -> WordSupports {
        let supp0 = self.letters.iter().flat_map(|c| c.vertices().iter().copied()).collect();
        let mut crossings = BTreeMap::new();
        for w in self.letters.windows(2) {
            let mut t: Vec<u32> = w[0].vertices().to_vec();
            t.extend(w[1].vertices());
            *crossings.entry(Cell::from_unsorted_dedup(t)).or_insert(0) += 1;
        }
        WordSupports { supp0, crossings }
    }

    /// First-appearance order, with `sigma_1` in natural order.
    fn eta(&self) -> HashMap<u32, u32> {
        let mut eta = HashMap::new();
        for c in &self.letters {
            for &v in c.vertices() {
                let next = eta.len() as u32 + 1;
                eta.entry(v).or_insert(next);
            }
        }
        eta
    }

    pub fn canonicalize(&self) -> Word {
        let eta = self.eta();
        let letters = self
            .letters
            .iter()
            .map(|c| Cell::from_unsorted(c.vertices().iter().map(|v| eta[v]).collect()).unwrap())
            .collect();
        Word { d: self.d, letters }
    }

    pub fn canonical_label(&self) -> CanonicalLabel {
        let eta = self.eta();
        CanonicalLabel(
            self.letters
                .windows(2)
                .map(|w| {
                    let (x, y) = step(&w[0], &w[1]).unwrap();
                    (eta[&x], eta[&y])
                })
                .collect(),
        )
    }

    pub fn equivalent(&self, other: &Word) -> bool {
        self.d == other.d && self.canonicalize() == other.canonicalize()
    }

    /// Product of the signed adjacency entries along the word.
    pub fn sign(&self) -> Result<i8, LmError> {
        if !self.is_closed() {
            return Err(LmError::InvalidParameter("the sign is defined for closed words".into()));
        }
        let mut s = 1i8;
        for w in self.letters.windows(2) {
            let (x, y) = step(&w[0], &w[1]).unwrap();
            let mut t = w[0].vertices().to_vec();
            t.push(y);
            t.sort_unstable();
            // sigma_i misses y, sigma_{i+1} misses x
            let (i, j) = (t.binary_search(&y).unwrap(), t.binary_search(&x).unwrap());
            if (i + j) % 2 == 0 {
                s = -s;
            }
        }
        Ok(s)
    }
}

impl Cell {
    fn from_unsorted_dedup(mut v: Vec<u32>) -> Cell {
        v.sort_unstable();
        v.dedup();
        Cell::new(v).unwrap()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = LmError;
    /// Parses `{1,2}{1,3}{1,2}`; `d` is the letter size.
    fn from_str(s: &str) -> Result<Self, LmError> {
        let mut letters = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let inner = rest.strip_prefix('{').ok_or_else(|| LmError::Parse(format!("expected '{{' in {s:?}")))?;
            let close = inner.find('}').ok_or_else(|| LmError::Parse(format!("unclosed letter in {s:?}")))?;
            let verts: Result<Vec<u32>, _> = inner[..close].split(',').map(|t| t.trim().parse::<u32>()).collect();
            let verts = verts.map_err(|e| LmError::Parse(format!("bad vertex in {s:?}: {e}")))?;
            letters.push(Cell::from_unsorted(verts)?);
            rest = inner[close + 1..].trim_start();
        }
        let d = letters.first().map(|c| c.dim() + 1).ok_or_else(|| LmError::Parse("empty word".into()))?;
        Word::new(d, letters)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentPolynomial {
    pub d: usize,
    pub k: usize,
    /// `s -> |W~_s^k|` for `s = d+1 ..= floor(k/2) + d`.
    pub coefficients: BTreeMap<usize, u64>,
}

impl MomentPolynomial {
    pub fn eval(&self, lambda: f64) -> f64 {
        self.coefficients.iter().map(|(&s, &c)| c as f64 * lambda.powi((s - self.d) as i32)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Tilde,
    Full,
}

/// Depth-first search over canonical closed words. Vertex `v` is bit `v - 1`.
struct Dfs<'a> {
    d: usize,
    k: usize,
    mode: Mode,
    start: u64,
    path: Vec<u64>,
    cells: Vec<(u64, u32)>,
    ones: usize,
    maxv: u32,
    visit: &'a mut dyn FnMut(&[u64], u32),
}

impl Dfs<'_> {
    fn run(&mut self) {
        let i = self.path.len() - 1;
        if i == self.k {
            if self.ones == 0 && *self.path.last().unwrap() == self.start {
                debug_assert!(self.maxv as usize <= self.cells.len() + self.d);
                (self.visit)(&self.path, self.maxv);
            }
            return;
        }
        let remaining = self.k - i - 1;
        let sigma = self.path[i];
        for x in 0..64u32 {
            if sigma >> x & 1 == 0 {
                continue;
            }
            for y in 0..=self.maxv {
                if sigma >> y & 1 == 1 || y >= 64 {
                    continue;
                }
                let tau = sigma | 1 << y;
                let fresh = y == self.maxv;
                let slot = self.cells.iter().position(|c| c.0 == tau);
                if self.mode == Mode::Tilde && !fresh && slot.is_none() {
                    continue;
                }
                let next = tau & !(1 << x);
                if ((next & !self.start).count_ones() as usize) > remaining {
                    continue;
                }
                let (old, idx) = match slot {
                    Some(j) => (self.cells[j].1, j),
                    None => {
                        self.cells.push((tau, 0));
                        (0, self.cells.len() - 1)
                    }
                };
                self.cells[idx].1 += 1;
                let ones_before = self.ones;
                if old == 0 {
                    self.ones += 1;
                } else if old == 1 {
                    self.ones -= 1;
                }
                if self.ones <= remaining {
                    self.path.push(next);
                    if fresh {
                        self.maxv += 1;
                    }
                    self.run();
                    if fresh {
                        self.maxv -= 1;
                    }
                    self.path.pop();
                }
                self.ones = ones_before;
                self.cells[idx].1 -= 1;
                if old == 0 {
                    self.cells.pop();
                }
            }
        }
    }
}

/// Rejects `(d, k)` outside the enumerable range.
pub fn check_enum(d: usize, k: usize) -> Result<(), LmError> {
    if d < 2 {
        return Err(LmError::InvalidParameter("d must be at least 2".into()));
    }
    if k < 1 {
        return Err(LmError::InvalidParameter("k must be at least 1".into()));
    }
    if k > MAX_ENUM_K || k / 2 + d > 63 {
        return Err(LmError::EnumerationCap { k, cap: MAX_ENUM_K });
    }
    Ok(())
}

/// Replays the first `depth` DFS levels to get independent prefixes.
fn prefixes(d: usize, k: usize, mode: Mode) -> Vec<(Vec<u64>, Vec<(u64, u32)>, usize, u32)> {
    let start = (1u64 << d) - 1;
    let mut out = Vec::new();
    let depth = k.min(2);
    let mut collect = |path: &[u64], maxv: u32, cells: &[(u64, u32)], ones: usize| {
        out.push((path.to_vec(), cells.to_vec(), ones, maxv));
    };
    fn rec(
        mode: Mode,
        start: u64,
        depth: usize,
        k: usize,
        path: &mut Vec<u64>,
        cells: &mut Vec<(u64, u32)>,
        ones: usize,
        maxv: u32,
        f: &mut dyn FnMut(&[u64], u32, &[(u64, u32)], usize),
    ) {
        let i = path.len() - 1;
        if i == depth {
            f(path, maxv, cells, ones);
            return;
        }
        let remaining = k - i - 1;
        let sigma = path[i];
        for x in (0..64u32).filter(|x| sigma >> x & 1 == 1) {
            for y in (0..=maxv).filter(|&y| sigma >> y & 1 == 0) {
                let tau = sigma | 1 << y;
                let fresh = y == maxv;
                let slot = cells.iter().position(|c| c.0 == tau);
                if mode == Mode::Tilde && !fresh && slot.is_none() {
                    continue;
                }
                let next = tau & !(1 << x);
                if (next & !start).count_ones() as usize > remaining {
                    continue;
                }
                let mut cells2 = cells.clone();
                let old = match slot {
                    Some(j) => {
                        cells2[j].1 += 1;
                        cells[j].1
                    }
                    None => {
                        cells2.push((tau, 1));
                        0
                    }
                };
                let ones2 = match old {
                    0 => ones + 1,
                    1 => ones - 1,
                    _ => ones,
                };
                if ones2 > remaining {
                    continue;
                }
                path.push(next);
                rec(mode, start, depth, k, path, &mut cells2, ones2, maxv + u32::from(fresh), f);
                path.pop();
            }
        }
    }
    rec(mode, start, depth, k, &mut vec![start], &mut Vec::new(), 0, d as u32, &mut collect);
    out
}

fn count_by_s(d: usize, k: usize, mode: Mode) -> BTreeMap<usize, u64> {
    let parts: Vec<BTreeMap<usize, u64>> = prefixes(d, k, mode)
        .into_par_iter()
        .map(|(path, cells, ones, maxv)| {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            let mut visit = |_: &[u64], s: u32| *counts.entry(s as usize).or_insert(0) += 1;
            let mut dfs = Dfs { d, k, mode, start: path[0], path, cells, ones, maxv, visit: &mut visit };
            dfs.run();
            counts
        })
        .collect();
    let mut total = BTreeMap::new();
    for p in parts {
        for (s, c) in p {
            let e: &mut u64 = total.entry(s).or_insert(0);
            *e = e.checked_add(c).expect("count overflow");
        }
    }
    total
}

/// `|W~_s^k|` for every `s`, including zeros.
pub fn enumerate_tilde_w(d: usize, k: usize) -> Result<MomentPolynomial, LmError> {
    check_enum(d, k)?;
    let counts = count_by_s(d, k, Mode::Tilde);
    let coefficients = (d + 1..=k / 2 + d).map(|s| (s, *counts.get(&s).unwrap_or(&0))).collect();
    Ok(MomentPolynomial { d, k, coefficients })
}

/// `|W_s^k|` for every `s` in `d+1 ..= floor(k/2) + d`.
pub fn enumerate_w(d: usize, k: usize) -> Result<BTreeMap<usize, u64>, LmError> {
    check_enum(d, k)?;
    let counts = count_by_s(d, k, Mode::Full);
    debug_assert!(counts.keys().all(|&s| s <= k / 2 + d));
    Ok((d + 1..=k / 2 + d).map(|s| (s, *counts.get(&s).unwrap_or(&0))).collect())
}

fn mask_to_cell(m: u64) -> Cell {
    Cell::new((0..64).filter(|b| m >> b & 1 == 1).map(|b| b + 1).collect()).unwrap()
}

/// Calls `f` on every canonical word of `W~^k` (all `s`).
pub fn for_each_tilde_word(d: usize, k: usize, mut f: impl FnMut(&Word)) -> Result<(), LmError> {
    check_enum(d, k)?;
    let start = (1u64 << d) - 1;
    let mut visit = |path: &[u64], _: u32| {
        let w = Word { d, letters: path.iter().map(|&m| mask_to_cell(m)).collect() };
        f(&w)
    };
    let mut dfs = Dfs {
        d,
        k,
        mode: Mode::Tilde,
        start,
        path: vec![start],
        cells: Vec::new(),
        ones: 0,
        maxv: d as u32,
        visit: &mut visit,
    };
    dfs.run();
    Ok(())
}

/// `beta_k(lambda) = sum_s |W~_s^k| lambda^(s-d)`.
pub fn beta_value(d: usize, k: usize, lambda: f64) -> Result<f64, LmError> {
    if !(lambda > 0.0) {
        return Err(LmError::InvalidParameter("lambda must be positive".into()));
    }
    Ok(enumerate_tilde_w(d, k)?.eval(lambda))
}

/// `|W~_{k/2+d}^k| == C_{k/2} d^{k/2}`.
pub fn catalan_check(d: usize, k: usize) -> Result<bool, LmError> {
    if k % 2 == 1 {
        return Err(LmError::InvalidParameter("k must be even".into()));
    }
    let poly = enumerate_tilde_w(d, k)?;
    let want = catalan(k as u64 / 2) * (d as u128).pow(k as u32 / 2);
    Ok(poly.coefficients.get(&(k / 2 + d)).map(|&c| c as u128) == Some(want))
}

/// `n! / ((n - s)! d!)`.
pub fn class_cardinality(d: usize, s: usize, n: usize) -> Result<BigUint, LmError> {
    if d > s || s > n {
        return Err(LmError::InvalidParameter(format!("need d <= s <= n, got d={d}, s={s}, n={n}")));
    }
    let falling: BigUint = (n - s + 1..=n).map(BigUint::from).product();
    let dfact: BigUint = (1..=d).map(BigUint::from).product();
    Ok(falling / dfact)
}

/// `d^k (kd)^k`.
pub fn unbounded_witness_count(d: usize, k: usize) -> BigUint {
    BigUint::from(d).pow(k as u32) * BigUint::from(k * d).pow(k as u32)
}

/// The witness bound together with `|W~_{k+d}^{4k}|` from enumeration.
pub fn witness_check(d: usize, k: usize) -> Result<(BigUint, u64), LmError> {
    let poly = enumerate_tilde_w(d, 4 * k)?;
    Ok((unbounded_witness_count(d, k), *poly.coefficients.get(&(k + d)).unwrap_or(&0)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCounts {
    pub d: usize,
    pub k: usize,
    pub tilde: BTreeMap<usize, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full: Option<BTreeMap<usize, u64>>,
}

/// Rows `s`, columns `k = 1..=k_max`, like the published table.
pub fn format_table(d: usize, k_max: usize, rows: &BTreeMap<usize, MomentPolynomial>) -> String {
    let s_max = k_max / 2 + d;
    let mut out = format!("d={d}\n{:>4}", "s\\k");
    for k in 1..=k_max {
        out.push_str(&format!("{k:>8}"));
    }
    out.push('\n');
    for s in d + 1..=s_max {
        out.push_str(&format!("{s:>4}"));
        for k in 1..=k_max {
            let c = rows.get(&k).and_then(|p| p.coefficients.get(&s)).copied().unwrap_or(0);
            out.push_str(&format!("{c:>8}"));
        }
        out.push('\n');
    }
    out
}
