//! Text and JSON formats for complexes, matrices and spectra.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::adjacency::{MatrixKind, MatrixMeta, SparseSymMatrix};
use crate::cells::{cell_count, ComplexSample};
use crate::spectra::{Esd, EsdMeta};
use crate::LmError;

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    n: usize,
    d: usize,
    p: f64,
    seed: u64,
    present_ranks: Vec<u64>,
}

/// `{n, d, p, seed, present_ranks}`; lazy samples are materialized first.
pub fn complex_to_json(sample: &ComplexSample) -> Result<String, LmError> {
    let present_ranks = match sample.present_ranks() {
        Some(r) => r.to_vec(),
        None => {
            let total = cell_count(sample.n(), sample.d())?;
            (0..total).filter(|&r| sample.contains_rank(r)).collect()
        }
    };
    let j = ComplexJson { n: sample.n(), d: sample.d(), p: sample.p(), seed: sample.seed(), present_ranks };
    Ok(serde_json::to_string(&j)?)
}

pub fn complex_from_json(s: &str) -> Result<ComplexSample, LmError> {
    let j: ComplexJson = serde_json::from_str(s)?;
    if j.n > 100_000 {
        return Err(LmError::Parse(format!("n = {} too large", j.n)));
    }
    ComplexSample::from_present_ranks(j.n, j.d, j.p, j.seed, j.present_ranks)
}

/// Matrix in coordinate form, upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct CooMatrix {
    pub meta: MatrixMeta,
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

fn header(meta: &MatrixMeta) -> String {
    format!("%lm-spectra sym {} {} {} {} {}", meta.n, meta.d, meta.p, meta.seed, meta.kind)
}

/// Header line, then one `row col value` line per nonzero with `row < col`, 0-based.
pub fn matrix_to_coo(m: &SparseSymMatrix) -> String {
    let mut s = header(m.meta());
    s.push('\n');
    m.for_each_upper(|i, j, v| {
        writeln!(s, "{i} {j} {v}").unwrap();
    });
    s
}

pub fn matrix_from_coo(text: &str) -> Result<CooMatrix, LmError> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| LmError::Parse("empty matrix file".into()))?;
    let f: Vec<&str> = head.split_whitespace().collect();
    if f.len() != 7 || f[0] != "%lm-spectra" || f[1] != "sym" {
        return Err(LmError::Parse(format!("bad header {head:?}")));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| LmError::Parse(format!("{s:?}: {e}")));
    let (n, d) = (num(f[2])?, num(f[3])?);
    let p: f64 = f[4].parse().map_err(|e| LmError::Parse(format!("{:?}: {e}", f[4])))?;
    let seed: u64 = f[5].parse().map_err(|e| LmError::Parse(format!("{:?}: {e}", f[5])))?;
    let kind: MatrixKind = f[6].parse().map_err(|_| LmError::Parse(format!("unknown kind {:?}", f[6])))?;
    if d < 1 || n < d + 1 || n > 100_000 {
        return Err(LmError::Parse(format!("bad shape n={n}, d={d}")));
    }
    let dim = cell_count(n, d - 1).map_err(|e| LmError::Parse(e.to_string()))? as usize;
    let mut entries = Vec::new();
    for (no, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(LmError::Parse(format!("line {}: expected `row col value`", no + 2)));
        }
        let (i, j) = (num(t[0])?, num(t[1])?);
        let v: f64 = t[2].parse().map_err(|e| LmError::Parse(format!("line {}: {e}", no + 2)))?;
        if i >= j || j >= dim || !v.is_finite() {
            return Err(LmError::Parse(format!("line {}: entry ({i},{j}) invalid for dim {dim}", no + 2)));
        }
        entries.push((i, j, v));
    }
    Ok(CooMatrix { meta: MatrixMeta { n, d, p, seed, kind }, dim, entries })
}

/// Comment header with the metadata, then one eigenvalue per line.
pub fn esd_to_csv(esd: &Esd) -> String {
    let m = &esd.meta;
    let mut s = format!("# n={} d={} p={} seed={} kind={}\neigenvalue\n", m.n, m.d, m.p, m.seed, m.kind);
    for x in &esd.eigenvalues {
        writeln!(s, "{x}").unwrap();
    }
    s
}

pub fn esd_from_csv(text: &str) -> Result<Esd, LmError> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| LmError::Parse("empty ESD file".into()))?;
    let body = head.strip_prefix("# ").ok_or_else(|| LmError::Parse("missing meta header".into()))?;
    let (mut n, mut d, mut p, mut seed, mut kind) = (None, None, None, None, None);
    for kv in body.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| LmError::Parse(format!("bad meta field {kv:?}")))?;
        let bad = |e: String| LmError::Parse(format!("meta {k}: {e}"));
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "d" => d = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "p" => p = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
            "kind" => kind = Some(v.to_string()),
            _ => return Err(LmError::Parse(format!("unknown meta field {k:?}"))),
        }
    }
    let missing = || LmError::Parse("incomplete meta header".into());
    let meta = EsdMeta {
        n: n.ok_or_else(missing)?,
        d: d.ok_or_else(missing)?,
        p: p.ok_or_else(missing)?,
        seed: seed.ok_or_else(missing)?,
        kind: kind.ok_or_else(missing)?,
    };
    if lines.next().map(str::trim) != Some("eigenvalue") {
        return Err(LmError::Parse("missing column header".into()));
    }
    let mut ev = Vec::new();
    for line in lines.map(str::trim).filter(|l| !l.is_empty()) {
        let x: f64 = line.parse().map_err(|e| LmError::Parse(format!("{line:?}: {e}")))?;
        if !x.is_finite() {
            return Err(LmError::Parse("non-finite eigenvalue".into()));
        }
        ev.push(x);
    }
    Ok(Esd::new(meta, ev))
}

pub fn esd_to_json(esd: &Esd) -> String {
    serde_json::to_string(esd).unwrap()
}

pub fn esd_from_json(text: &str) -> Result<Esd, LmError> {
    let e: Esd = serde_json::from_str(text)?;
    if e.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(LmError::Parse("non-finite eigenvalue".into()));
    }
    Ok(Esd::new(e.meta, e.eigenvalues))
}
