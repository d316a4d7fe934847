//! Empirical spectral distributions, moments and the complete-complex spectra.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjacency::{MatrixKind, SparseSymMatrix};
use crate::cells::{binomial, cell_count, BinomTable, ComplexSample};
use crate::limits::ball::explore;
use crate::rng::{purpose, substream};
use crate::LmError;

pub const DEFAULT_DENSE_CAP: usize = 6000;

/// Eigenvalues closer than this count as one atom and as ties in the KS scan.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsdMeta {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub kind: String,
}

/// Eigenvalues sorted ascending, each with mass `1 / len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Esd {
    pub meta: EsdMeta,
    pub eigenvalues: Vec<f64>,
}

impl Esd {
    pub fn new(meta: EsdMeta, mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Esd { meta, eigenvalues }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Law of `-X`.
    pub fn reflect(&self) -> Esd {
        Esd::new(self.meta.clone(), self.eigenvalues.iter().map(|x| -x).collect())
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.eigenvalues.iter().map(|x| x.powi(k as i32)).sum::<f64>() / self.len() as f64
    }
}

fn faer_eigenvalues(m: &faer::Mat<f64>) -> Result<Vec<f64>, LmError> {
    m.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| LmError::InvalidParameter(format!("eigensolver failed: {e:?}")))
}

/// All eigenvalues by dense symmetric eigensolves.
///
/// Matrices without a centring term are solved one connected component at a time.
pub fn eigenvalues_dense(matrix: &SparseSymMatrix, dense_cap: usize) -> Result<Esd, LmError> {
    let dim = matrix.dim();
    if dim > dense_cap {
        return Err(LmError::DenseCapExceeded { dim, cap: dense_cap });
    }
    let meta = matrix.meta();
    let meta = EsdMeta { n: meta.n, d: meta.d, p: meta.p, seed: meta.seed, kind: meta.kind.name().into() };
    let mut ev = Vec::with_capacity(dim);
    match matrix.components() {
        None => ev = faer_eigenvalues(&matrix.to_dense(dense_cap)?)?,
        Some(comps) => {
            let mut local = vec![usize::MAX; dim];
            for comp in comps {
                match comp.len() {
                    1 => ev.push(0.0),
                    2 => {
                        let a = matrix.sparse_entry(comp[0], comp[1]).abs();
                        ev.extend([-a, a]);
                    }
                    m => {
                        for (i, &v) in comp.iter().enumerate() {
                            local[v] = i;
                        }
                        let mut sub = faer::Mat::<f64>::zeros(m, m);
                        for (i, &v) in comp.iter().enumerate() {
                            for (w, x) in matrix.row(v) {
                                sub[(i, local[w])] = x;
                            }
                        }
                        ev.extend(faer_eigenvalues(&sub)?);
                    }
                }
            }
        }
    }
    Ok(Esd::new(meta, ev))
}

/// Sup-distance between the two distribution functions, by merge scan.
/// Points within [`TIE_TOL`] of each other are treated as equal.
pub fn ks_distance(a: &Esd, b: &Esd) -> f64 {
    ks_distance_tol(&a.eigenvalues, &b.eigenvalues, TIE_TOL)
}

pub fn ks_distance_tol(a: &[f64], b: &[f64], tol: f64) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let mut end = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        loop {
            let mut moved = false;
            while i < a.len() && a[i] <= end + tol {
                end = end.max(a[i]);
                i += 1;
                moved = true;
            }
            while j < b.len() && b[j] <= end + tol {
                end = end.max(b[j]);
                j += 1;
                moved = true;
            }
            if !moved {
                break;
            }
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistMode {
    Density,
    Probability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mode: HistMode,
    pub meta: EsdMeta,
}

impl Histogram {
    /// Bin heights under the normalisation mode.
    pub fn heights(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let p = c as f64 / total as f64;
                match self.mode {
                    HistMode::Probability => p,
                    HistMode::Density => p / (self.edges[i + 1] - self.edges[i]),
                }
            })
            .collect()
    }
}

pub fn histogram(esd: &Esd, bins: usize, mode: HistMode) -> Result<Histogram, LmError> {
    if bins == 0 {
        return Err(LmError::InvalidParameter("bins must be positive".into()));
    }
    if esd.is_empty() {
        return Err(LmError::InvalidParameter("empty spectrum".into()));
    }
    let lo = esd.eigenvalues[0] - 1e-9;
    let hi = esd.eigenvalues[esd.len() - 1] + 1e-9;
    let w = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + w * i as f64 }).collect();
    let mut counts = vec![0u64; bins];
    for &x in &esd.eigenvalues {
        let b = (((x - lo) / w) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts, mode, meta: esd.meta.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Clusters of at least two eigenvalues with consecutive gaps at most `tol`.
pub fn atom_detect(esd: &Esd, tol: f64) -> Vec<Atom> {
    let ev = &esd.eigenvalues;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=ev.len() {
        if i == ev.len() || ev[i] - ev[i - 1] > tol {
            let c = i - start;
            if c >= 2 {
                let mean = ev[start..i].iter().sum::<f64>() / c as f64;
                out.push(Atom { location: mean, mass: c as f64 / ev.len() as f64 });
            }
            start = i;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    DenseExact,
    RootWalkSampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: u32,
    pub value: f64,
    pub stderr: f64,
    pub method: MomentMethod,
}

pub fn esd_moment(esd: &Esd, k: u32) -> MomentEstimate {
    MomentEstimate { k, value: esd.moment(k), stderr: 0.0, method: MomentMethod::DenseExact }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `m_k` estimated by `(M_S^k)_{oo}` averaged over uniform roots `o`.
///
/// `S` is the radius-`ceil(k/2)` ball of `o` in the line graph, which makes the
/// estimate exact in expectation for the uncentred kinds. For centred kinds the
/// centring term is restricted to `S`, dropping walks that leave the ball
/// through absent cofaces; the error is of relative order `p`.
pub fn moment_root_sampled(
    sample: &ComplexSample,
    kind: MatrixKind,
    k: u32,
    roots: usize,
    seed: u64,
    vertex_cap: usize,
) -> Result<MomentEstimate, LmError> {
    if kind.is_complete() {
        return Err(LmError::InvalidParameter("root sampling needs a random kind".into()));
    }
    if roots == 0 {
        return Err(LmError::InvalidParameter("roots must be positive".into()));
    }
    let dim = sample.dim();
    let values: Result<Vec<f64>, LmError> = (0..roots)
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            let mut rng = substream(seed, purpose::ROOTS, i as u64);
            let root = rng.random_range(0..dim);
            root_walk_value(sample, kind, k, root, vertex_cap)
        })
        .collect();
    let (value, stderr) = mean_stderr(&values?);
    Ok(MomentEstimate { k, value, stderr, method: MomentMethod::RootWalkSampled })
}

/// `(M_S^k)_{oo}` for one root rank.
pub fn root_walk_value(
    sample: &ComplexSample,
    kind: MatrixKind,
    k: u32,
    root: u64,
    vertex_cap: usize,
) -> Result<f64, LmError> {
    let radius = k.div_ceil(2) as usize;
    let ball = explore(sample, root, radius, false, vertex_cap)?;
    let m = ball.ranks.len();
    let signed = kind.is_signed();
    let d = sample.d();
    let centring = if kind.is_centred() { Some(local_faces(&ball.cells, d, sample.n())?) } else { None };
    let p = sample.p();
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; m];
        for (u, nb) in ball.adj.iter().enumerate() {
            y[u] = nb.iter().map(|&(v, s)| if signed { s * x[v as usize] } else { x[v as usize] }).sum();
        }
        if let Some((faces, nf)) = &centring {
            let sign = |j: usize| if signed && j % 2 == 1 { -1.0 } else { 1.0 };
            let mut h = vec![0.0; *nf];
            for u in 0..m {
                if x[u] != 0.0 {
                    for j in 0..d {
                        h[faces[u * d + j]] += sign(j) * x[u];
                    }
                }
            }
            for u in 0..m {
                let mut s = -(d as f64) * x[u];
                for j in 0..d {
                    s += sign(j) * h[faces[u * d + j]];
                }
                y[u] -= p * s;
            }
        }
        y
    };
    // (M^k)_oo = <M^a e_o, M^b e_o> with a + b = k
    let mut x = vec![0.0; m];
    x[0] = 1.0;
    let half = k / 2;
    for _ in 0..half {
        x = apply(&x);
    }
    let v = if k % 2 == 0 {
        x.iter().map(|a| a * a).sum()
    } else {
        let y = apply(&x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    };
    Ok(v)
}

/// Local `(d-2)`-face indices of the ball cells, `d` per cell.
fn local_faces(cells: &[Vec<u32>], d: usize, n: usize) -> Result<(Vec<usize>, usize), LmError> {
    let table = BinomTable::new(n, d)?;
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut faces = Vec::with_capacity(cells.len() * d);
    for c in cells {
        for j in 0..d {
            let r = table.rank_without(c, j);
            let next = index.len();
            faces.push(*index.entry(r).or_insert(next));
        }
    }
    Ok((faces, index.len()))
}

/// Catalan number `C_m`.
pub fn catalan(m: u64) -> u128 {
    binomial(2 * m, m).unwrap() / (m as u128 + 1)
}

/// `k`-th moment of the standard semicircle law.
pub fn semicircle_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        catalan(k as u64 / 2) as f64
    }
}

/// Root-sampled `m_k(B) / (lambda d)^{k/2}` for the centred unsigned matrix.
pub fn scaled_moment_check(
    sample: &ComplexSample,
    lambda: f64,
    k: u32,
    roots: usize,
    seed: u64,
    vertex_cap: usize,
) -> Result<MomentEstimate, LmError> {
    let est = moment_root_sampled(sample, MatrixKind::CentredUnsigned, k, roots, seed, vertex_cap)?;
    let scale = (lambda * sample.d() as f64).powf(k as f64 / 2.0);
    Ok(MomentEstimate { value: est.value / scale, stderr: est.stderr / scale, ..est })
}

/// `||B||_F / sqrt(dim)`.
pub fn frobenius_normalized(matrix: &SparseSymMatrix) -> f64 {
    matrix.frobenius_normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    pub multiplicity: u64,
}

fn check_complete(n: usize, d: usize) -> Result<(), LmError> {
    if d < 1 || n < d + 1 {
        return Err(LmError::InvalidParameter(format!("need 1 <= d < n, got d = {d}, n = {n}")));
    }
    cell_count(n, d - 1).map(|_| ())
}

/// Spectrum of the signed complete matrix.
pub fn complete_signed_eigs(n: usize, d: usize) -> Result<Vec<Eigenpair>, LmError> {
    check_complete(n, d)?;
    let b = |a: usize, c: usize| binomial(a as u64, c as u64).unwrap() as u64;
    Ok(vec![
        Eigenpair { value: -(d as f64), multiplicity: b(n - 1, d) },
        Eigenpair { value: (n - d) as f64, multiplicity: b(n - 1, d - 1) },
    ])
}

/// Spectrum of the unsigned complete matrix, one eigenvalue per `s = 0..=d`.
pub fn complete_unsigned_eigs(n: usize, d: usize) -> Result<Vec<Eigenpair>, LmError> {
    check_complete(n, d)?;
    if n < 2 * d {
        return Err(LmError::InvalidParameter(format!("the closed form needs n >= 2d, got n = {n}, d = {d}")));
    }
    let b = |a: i64, c: i64| -> i128 {
        if a < 0 || c < 0 || c > a {
            0
        } else {
            binomial(a as u64, c as u64).unwrap() as i128
        }
    };
    let (ni, di) = (n as i64, d as i64);
    let mut out: Vec<Eigenpair> = Vec::new();
    for s in 0..=di {
        let mut alpha: i128 = 0;
        for r in (s - 1).max(0)..=s.min(di - 1) {
            let sign = if (s - r) % 2 == 0 { 1 } else { -1 };
            alpha += sign * b(s, r) * (di - r) as i128 * b(ni - di - s + r, 1 - s + r);
        }
        let mult = (b(ni, s) - b(ni, s - 1)) as u64;
        let value = alpha as f64;
        match out.iter_mut().find(|e| e.value == value) {
            Some(e) => e.multiplicity += mult,
            None => out.push(Eigenpair { value, multiplicity: mult }),
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn esd(v: Vec<f64>) -> Esd {
        Esd::new(EsdMeta { n: 0, d: 0, p: 0.0, seed: 0, kind: "test".into() }, v)
    }

    #[test]
    fn ks_basic() {
        assert_eq!(ks_distance(&esd(vec![0.0]), &esd(vec![1.0])), 1.0);
        assert_eq!(ks_distance(&esd(vec![0.0, 1.0]), &esd(vec![1.0, 0.0])), 0.0);
        assert!((ks_distance(&esd(vec![0.0, 1.0]), &esd(vec![0.0, 2.0])) - 0.5).abs() < 1e-15);
        // rounding noise on an atom is not a discrepancy
        assert_eq!(ks_distance(&esd(vec![-1e-15, 1.0]), &esd(vec![1e-15, 1.0])), 0.0);
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&esd(vec![0.0, 0.5, 1.0, 1.0]), 4, HistMode::Density).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 4);
        assert_eq!(h.counts[3], 2);
        let area: f64 = h.heights().iter().zip(h.edges.windows(2)).map(|(y, e)| y * (e[1] - e[0])).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert!(histogram(&esd(vec![1.0]), 0, HistMode::Density).is_err());
    }

    #[test]
    fn atoms() {
        let a = atom_detect(&esd(vec![-1.0, 0.0, 0.0, 0.0, 2.0, 2.0 + 1e-12]), 1e-9);
        assert_eq!(a.len(), 2);
        assert!((a[0].mass - 0.5).abs() < 1e-15);
    }

    #[test]
    fn complete_small() {
        let u = complete_unsigned_eigs(6, 2).unwrap();
        assert_eq!(
            u,
            vec![
                Eigenpair { value: -2.0, multiplicity: 9 },
                Eigenpair { value: 2.0, multiplicity: 5 },
                Eigenpair { value: 8.0, multiplicity: 1 },
            ]
        );
        assert!(complete_signed_eigs(2, 2).is_err());
    }

    #[test]
    fn catalan_values() {
        let c: Vec<u128> = (0..7).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132]);
        assert_eq!(semicircle_moment(3), 0.0);
        assert_eq!(semicircle_moment(4), 2.0);
    }
}
