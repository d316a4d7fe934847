//! Adjacency matrices on the `(d-1)`-cells, indexed by colex rank.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cells::{cell_count, colex_next, for_each_coface, insert_sorted, BinomTable, ComplexSample};
use crate::LmError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Unsigned,
    Signed,
    CentredUnsigned,
    CentredSigned,
    CompleteUnsigned,
    CompleteSigned,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 6] = [
        MatrixKind::Unsigned,
        MatrixKind::Signed,
        MatrixKind::CentredUnsigned,
        MatrixKind::CentredSigned,
        MatrixKind::CompleteUnsigned,
        MatrixKind::CompleteSigned,
    ];

    pub fn is_signed(self) -> bool {
        matches!(self, MatrixKind::Signed | MatrixKind::CentredSigned | MatrixKind::CompleteSigned)
    }

    pub fn is_centred(self) -> bool {
        matches!(self, MatrixKind::CentredUnsigned | MatrixKind::CentredSigned)
    }

    pub fn is_complete(self) -> bool {
        matches!(self, MatrixKind::CompleteUnsigned | MatrixKind::CompleteSigned)
    }

    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Unsigned => "unsigned",
            MatrixKind::Signed => "signed",
            MatrixKind::CentredUnsigned => "centred-unsigned",
            MatrixKind::CentredSigned => "centred-signed",
            MatrixKind::CompleteUnsigned => "complete-unsigned",
            MatrixKind::CompleteSigned => "complete-signed",
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixKind {
    type Err = LmError;
    fn from_str(s: &str) -> Result<Self, LmError> {
        MatrixKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LmError::InvalidParameter(format!("unknown matrix kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub kind: MatrixKind,
}

/// Entry of the signed matrix between `tau \ tau[i]` and `tau \ tau[j]`.
#[inline]
pub fn parity_sign(i: usize, j: usize) -> f64 {
    if (i + j) % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Implicit `-p` times the complete matrix, applied through the `(d-2)`-faces.
///
/// The complete matrix equals `∂ᵀ∂ - dI`, where `∂` maps a `(d-1)`-cell to its
/// faces with the orientation signs `(-1)^i` (all `+1` in the unsigned case).
#[derive(Clone, Debug)]
struct Correction {
    p: f64,
    signed: bool,
    face_count: usize,
    /// `dim * d` face ranks, row-major.
    faces: Vec<u32>,
}

impl Correction {
    fn new(n: usize, d: usize, p: f64, signed: bool, table: &BinomTable) -> Result<Self, LmError> {
        let dim = cell_count(n, d - 1)? as usize;
        let face_count = if d == 1 { 1 } else { cell_count(n, d - 2)? as usize };
        if face_count > u32::MAX as usize {
            return Err(LmError::InvalidParameter("too many faces".into()));
        }
        let mut faces = Vec::with_capacity(dim * d);
        let mut sigma: Vec<u32> = (1..=d as u32).collect();
        for _ in 0..dim {
            for j in 0..d {
                faces.push(table.rank_without(&sigma, j) as u32);
            }
            colex_next(&mut sigma, n as u32);
        }
        Ok(Correction { p, signed, face_count, faces })
    }

    fn face_sign(&self, j: usize) -> f64 {
        if self.signed && j % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// `y -= p * M x`.
    fn apply_sub(&self, d: usize, x: &[f64], y: &mut [f64]) {
        let mut h = vec![0.0; self.face_count];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for j in 0..d {
                    h[self.faces[i * d + j] as usize] += self.face_sign(j) * xi;
                }
            }
        }
        for i in 0..x.len() {
            let mut s = -(d as f64) * x[i];
            for j in 0..d {
                s += self.face_sign(j) * h[self.faces[i * d + j] as usize];
            }
            y[i] -= self.p * s;
        }
    }
}

/// Symmetric matrix in CSR form, optionally minus an implicit `p`-multiple of the complete matrix.
#[derive(Clone, Debug)]
pub struct SparseSymMatrix {
    meta: MatrixMeta,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    correction: Option<Correction>,
}

fn build_csr(
    n: usize,
    d: usize,
    signed: bool,
    table: &BinomTable,
    present: impl Fn(u64) -> bool,
) -> Result<(usize, Vec<usize>, Vec<u32>, Vec<f64>), LmError> {
    let dim = cell_count(n, d - 1)?;
    if dim > u32::MAX as u64 {
        return Err(LmError::InvalidParameter(format!("dimension {dim} too large")));
    }
    let dim = dim as usize;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut row: Vec<(u32, f64)> = Vec::new();
    let mut sigma: Vec<u32> = (1..=d as u32).collect();
    for _ in 0..dim {
        row.clear();
        for_each_coface(table, n, &sigma, |x, r| {
            if present(r) {
                let (tau, q) = insert_sorted(&sigma, x);
                for j in (0..=d).filter(|&j| j != q) {
                    let v = if signed { parity_sign(q, j) } else { 1.0 };
                    row.push((table.rank_without(&tau, j) as u32, v));
                }
            }
        });
        row.sort_unstable_by_key(|e| e.0);
        for &(c, v) in &row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
        colex_next(&mut sigma, n as u32);
    }
    Ok((dim, row_ptr, cols, vals))
}

pub fn build_adjacency(sample: &ComplexSample, kind: MatrixKind) -> Result<SparseSymMatrix, LmError> {
    let (n, d) = (sample.n(), sample.d());
    let table = sample.table();
    let signed = kind.is_signed();
    let (dim, row_ptr, cols, vals) = if kind.is_complete() {
        build_csr(n, d, signed, table, |_| true)?
    } else {
        build_csr(n, d, signed, table, |r| sample.contains_rank(r))?
    };
    let correction = if kind.is_centred() {
        Some(Correction::new(n, d, sample.p(), signed, table)?)
    } else {
        None
    };
    Ok(SparseSymMatrix {
        meta: MatrixMeta { n, d, p: sample.p(), seed: sample.seed(), kind },
        dim,
        row_ptr,
        cols,
        vals,
        correction,
    })
}

impl SparseSymMatrix {
    pub fn meta(&self) -> &MatrixMeta {
        &self.meta
    }

    pub fn kind(&self) -> MatrixKind {
        self.meta.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored nonzeros of the sparse part.
    pub fn sparse_nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, &v)| (c as usize, v))
    }

    /// Entry `(i, j)` of the sparse part.
    pub fn sparse_entry(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&(j as u32)) {
            Ok(k) => self.vals[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LmError> {
        if x.len() != self.dim {
            return Err(LmError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut y = vec![0.0; self.dim];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
        if let Some(c) = &self.correction {
            c.apply_sub(self.meta.d, x, &mut y);
        }
        Ok(y)
    }

    /// Dense copy. Centred kinds are expanded through the complete neighbourhoods.
    pub fn to_dense(&self, cap: usize) -> Result<faer::Mat<f64>, LmError> {
        if self.dim > cap {
            return Err(LmError::DenseCapExceeded { dim: self.dim, cap });
        }
        let mut m = faer::Mat::<f64>::zeros(self.dim, self.dim);
        if self.correction.is_some() {
            self.for_each_upper(|i, j, v| {
                m[(i, j)] = v;
                m[(j, i)] = v;
            });
        } else {
            for i in 0..self.dim {
                for (j, v) in self.row(i) {
                    m[(i, j)] = v;
                }
            }
        }
        Ok(m)
    }

    /// Every structurally nonzero entry with `i < j`, in row order.
    pub fn for_each_upper(&self, mut f: impl FnMut(usize, usize, f64)) {
        let Some(corr) = &self.correction else {
            for i in 0..self.dim {
                for (j, v) in self.row(i).filter(|&(j, _)| j > i) {
                    f(i, j, v);
                }
            }
            return;
        };
        // A centred entry is m * (1[tau present] - p) on the support of the complete matrix
        let (n, d) = (self.meta.n, self.meta.d);
        let table = BinomTable::new(n, d + 1).expect("table fits");
        let mut sigma: Vec<u32> = (1..=d as u32).collect();
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.dim {
            row.clear();
            for_each_coface(&table, n, &sigma, |x, _| {
                let (tau, q) = insert_sorted(&sigma, x);
                for j in (0..=d).filter(|&j| j != q) {
                    let c = table.rank_without(&tau, j) as usize;
                    if c > i {
                        let m = if corr.signed { parity_sign(q, j) } else { 1.0 };
                        row.push((c, self.sparse_entry(i, c) - corr.p * m));
                    }
                }
            });
            row.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &row {
                f(i, j, v);
            }
            colex_next(&mut sigma, n as u32);
        }
    }

    /// Connected components of the sparse part; `None` for centred kinds.
    pub fn components(&self) -> Option<Vec<Vec<usize>>> {
        if self.correction.is_some() {
            return None;
        }
        let mut comp = vec![usize::MAX; self.dim];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.dim {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.row(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        Some(out)
    }

    /// `||M||_F / sqrt(dim)`, exact.
    pub fn frobenius_normalized(&self) -> f64 {
        let sq: f64 = match &self.correction {
            None => self.vals.iter().map(|v| v * v).sum(),
            Some(c) => {
                let (n, d) = (self.meta.n as f64, self.meta.d as f64);
                let complete_nnz = self.dim as f64 * d * (n - d);
                let a_nnz = self.cols.len() as f64;
                // sparse entries coincide with the complete entries on their support
                a_nnz * (1.0 - c.p).powi(2) + c.p * c.p * (complete_nnz - a_nnz)
            }
        };
        (sq / self.dim as f64).sqrt()
    }

    /// `sum_{ij} M_ij^2`, exact, i.e. `tr(M^2)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_normalized().powi(2) * self.dim as f64
    }
}
