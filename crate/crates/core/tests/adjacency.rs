use lm_spectra::adjacency::{build_adjacency, MatrixKind};
use lm_spectra::cells::{cell_count, rank_cell, sample_complex, unrank_cell, Cell, CellRank, ComplexSample, SampleMode};
use lm_spectra::spectra::{complete_signed_eigs, complete_unsigned_eigs, eigenvalues_dense};
use proptest::prelude::*;

/// Orientation sign of the face of `tau` missing `x`: `(-1)^position`.
fn face_sign(tau: &[u32], x: u32) -> f64 {
    let pos = tau.iter().position(|&v| v == x).unwrap();
    if pos % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Entry from first principles: 0 unless the union is a d-cell; signed entries are
/// minus the product of the two induced boundary orientations.
fn oracle(s: &ComplexSample, a: &Cell, b: &Cell, kind: MatrixKind) -> f64 {
    let mut u: Vec<u32> = a.vertices().iter().chain(b.vertices()).copied().collect();
    u.sort_unstable();
    u.dedup();
    if a == b || u.len() != s.d() + 1 {
        return 0.0;
    }
    let present = s.contains_dcell(&Cell::new(u.clone()).unwrap()).unwrap();
    let x = *u.iter().find(|v| !a.contains(**v)).unwrap();
    let y = *u.iter().find(|v| !b.contains(**v)).unwrap();
    let m = if kind.is_signed() { -face_sign(&u, x) * face_sign(&u, y) } else { 1.0 };
    let base = if kind.is_complete() { 1.0 } else if present { 1.0 } else { 0.0 };
    let shift = if kind.is_centred() { s.p() } else { 0.0 };
    m * (base - shift)
}

fn check_all_kinds(n: usize, d: usize, p: f64, seed: u64) {
    let s = sample_complex(n, d, p, seed, SampleMode::Lazy).unwrap();
    let dim = cell_count(n, d - 1).unwrap() as usize;
    let cells: Vec<Cell> = (0..dim as u64).map(|r| unrank_cell(CellRank(r), d - 1, n).unwrap()).collect();
    for kind in MatrixKind::ALL {
        let m = build_adjacency(&s, kind).unwrap();
        assert_eq!(m.dim(), dim);
        let dense = m.to_dense(10_000).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let want = oracle(&s, &cells[i], &cells[j], kind);
                assert!((dense[(i, j)] - want).abs() < 1e-12, "{kind} n={n} d={d} ({i},{j})");
            }
        }
    }
}

#[test]
fn entries_match_first_principles() {
    check_all_kinds(6, 2, 0.5, 1);
    check_all_kinds(7, 3, 0.3, 2);
    check_all_kinds(6, 1, 0.4, 3);
    check_all_kinds(7, 4, 0.6, 4);
}

#[test]
fn triangle_signs() {
    let s = ComplexSample::from_present_cells(3, 2, &[Cell::new(vec![1, 2, 3]).unwrap()]).unwrap();
    let m = build_adjacency(&s, MatrixKind::Signed).unwrap();
    let r = |v: Vec<u32>| rank_cell(&Cell::new(v).unwrap(), 3).unwrap().0 as usize;
    // [1,2] ~ [1,3]: removed positions 2 and 1 in [1,2,3] (0-based), odd sum
    assert_eq!(m.sparse_entry(r(vec![1, 2]), r(vec![1, 3])), 1.0);
    assert_eq!(m.sparse_entry(r(vec![1, 2]), r(vec![2, 3])), -1.0);
    assert_eq!(m.sparse_entry(r(vec![1, 3]), r(vec![2, 3])), 1.0);
}

#[test]
fn empty_complex_spectrum_is_zero() {
    let s = sample_complex(20, 2, 0.0, 9, SampleMode::Lazy).unwrap();
    for kind in [MatrixKind::Unsigned, MatrixKind::Signed, MatrixKind::CentredSigned] {
        let e = eigenvalues_dense(&build_adjacency(&s, kind).unwrap(), 6000).unwrap();
        assert_eq!(e.len(), 190);
        assert!(e.eigenvalues.iter().all(|&x| x.abs() < 1e-12));
    }
}

#[test]
fn full_complex_equals_complete() {
    for (n, d) in [(6, 2), (8, 3), (9, 4)] {
        let s = sample_complex(n, d, 1.0, 0, SampleMode::Lazy).unwrap();
        for (a, b) in [
            (MatrixKind::Unsigned, MatrixKind::CompleteUnsigned),
            (MatrixKind::Signed, MatrixKind::CompleteSigned),
        ] {
            let x = build_adjacency(&s, a).unwrap().to_dense(1000).unwrap();
            let y = build_adjacency(&s, b).unwrap().to_dense(1000).unwrap();
            assert_eq!(x, y);
        }
    }
}

#[test]
fn complete_closed_forms_more_cases() {
    for (n, d) in [(9, 2), (8, 3), (9, 4), (6, 1)] {
        let s = sample_complex(n, d, 0.0, 0, SampleMode::Lazy).unwrap();
        for kind in [MatrixKind::CompleteUnsigned, MatrixKind::CompleteSigned] {
            let e = eigenvalues_dense(&build_adjacency(&s, kind).unwrap(), 1000).unwrap();
            let closed = if kind.is_signed() {
                complete_signed_eigs(n, d).unwrap()
            } else {
                complete_unsigned_eigs(n, d).unwrap()
            };
            let mut want = Vec::new();
            for p in closed {
                want.extend(std::iter::repeat_n(p.value, p.multiplicity as usize));
            }
            assert_eq!(want.len(), e.len());
            for (a, b) in e.eigenvalues.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8, "n={n} d={d} {kind}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn kind_names_round_trip() {
    for k in MatrixKind::ALL {
        assert_eq!(k.name().parse::<MatrixKind>().unwrap(), k);
    }
    assert!("bogus".parse::<MatrixKind>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matvec_matches_dense(seed in any::<u64>(), p in 0.0f64..1.0, d in 1usize..4, kind_ix in 0usize..6) {
        let n = d + 5;
        let s = sample_complex(n, d, p, seed, SampleMode::Lazy).unwrap();
        let m = build_adjacency(&s, MatrixKind::ALL[kind_ix]).unwrap();
        let dense = m.to_dense(1000).unwrap();
        let x: Vec<f64> = (0..m.dim()).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let y = m.matvec(&x).unwrap();
        for i in 0..m.dim() {
            let want: f64 = (0..m.dim()).map(|j| dense[(i, j)] * x[j]).sum();
            prop_assert!((y[i] - want).abs() < 1e-9);
        }
        // symmetric with zero diagonal
        for i in 0..m.dim() {
            prop_assert_eq!(dense[(i, i)], 0.0);
            for j in 0..i {
                prop_assert_eq!(dense[(i, j)], dense[(j, i)]);
            }
        }
        let fro: f64 = (0..m.dim()).flat_map(|i| (0..m.dim()).map(move |j| (i, j))).map(|(i, j)| dense[(i, j)].powi(2)).sum();
        prop_assert!((m.frobenius_sq() - fro).abs() < 1e-9 * (1.0 + fro));
    }

    #[test]
    fn trace_moments_match_eigenvalues(seed in any::<u64>(), kind_ix in 0usize..4) {
        let s = sample_complex(8, 2, 0.3, seed, SampleMode::Lazy).unwrap();
        let m = build_adjacency(&s, MatrixKind::ALL[kind_ix]).unwrap();
        let e = eigenvalues_dense(&m, 1000).unwrap();
        prop_assert!(e.moment(1).abs() < 1e-9);
        prop_assert!((e.moment(2) - m.frobenius_sq() / m.dim() as f64).abs() < 1e-9);
    }
}
