mod common;

use std::f64::consts::LN_2;

use entropylab::binary_shift::{structure_row, PrefixRanks};
use entropylab::{form_matrix, gf2_rank, structure_algebra, structure_sequence, CommutationSet};
use rand::Rng;

/// Rank over GF(2) with plain booleans.
fn dense_rank(x: &CommutationSet, n: usize) -> usize {
    let mut a: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && x.contains(i.abs_diff(j) as u64))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for c in 0..n {
        if let Some(p) = (rank..n).find(|&r| a[r][c]) {
            a.swap(p, rank);
            let pivot = a[rank].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != rank && row[c] {
                    row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
                }
            }
            rank += 1;
        }
    }
    rank
}

fn battery() -> Vec<CommutationSet> {
    let mut out = vec![
        CommutationSet::default(),
        CommutationSet::finite([1]).unwrap(),
        CommutationSet::finite([1, 2]).unwrap(),
        CommutationSet::finite([2]).unwrap(),
        CommutationSet::finite([1, 3, 4]).unwrap(),
        CommutationSet::finite([1])
            .unwrap()
            .with_period(2, vec![0])
            .unwrap(),
        CommutationSet::finite([])
            .unwrap()
            .with_period(3, vec![1])
            .unwrap(),
        CommutationSet::finite([2, 5])
            .unwrap()
            .with_period(4, vec![0, 1])
            .unwrap(),
    ];
    let mut r = common::rng(9);
    for _ in 0..4 {
        let base: Vec<u64> = (1..=12).filter(|_| r.random::<bool>()).collect();
        out.push(CommutationSet::new(base, None, vec![]).unwrap());
    }
    out
}

#[test]
fn nearest_neighbour_shift_up_to_512() {
    let x = CommutationSet::finite([1]).unwrap();
    let rows = structure_sequence(&x, 512).unwrap();
    assert_eq!(rows.len(), 512);
    for r in &rows {
        assert_eq!((r.d_n, r.c_n), (r.n / 2, r.n % 2), "n = {}", r.n);
        if r.n <= 32 {
            assert_eq!(dense_rank(&x, r.n), 2 * r.d_n);
        }
    }
}

#[test]
fn ranks_are_even_and_rows_balance() {
    for x in battery() {
        let rows = structure_sequence(&x, 256).unwrap();
        for r in &rows {
            assert_eq!(r.n, 2 * r.d_n + r.c_n);
        }
        for w in rows.windows(2) {
            assert!(w[1].d_n >= w[0].d_n, "{x:?}");
        }
        for n in [1, 7, 33, 64, 65, 128, 200, 256] {
            let scratch = gf2_rank(&form_matrix(&x, n)).unwrap();
            assert_eq!(scratch % 2, 0);
            assert_eq!(scratch, 2 * rows[n - 1].d_n, "{x:?} n = {n}");
        }
    }
}

#[test]
fn incremental_matches_dense_oracle_small() {
    for x in battery() {
        let form = form_matrix(&x, 40);
        let ranks: Vec<usize> = PrefixRanks::new(&form).unwrap().collect();
        for n in 1..=40 {
            assert_eq!(ranks[n - 1], dense_rank(&x, n), "{x:?} n = {n}");
        }
    }
}

#[test]
fn two_distance_shift_at_six() {
    let x = CommutationSet::finite([1, 2]).unwrap();
    let r = structure_row(&x, 6).unwrap();
    assert_eq!(2 * r.d_n, dense_rank(&x, 6));
    assert_eq!(r.n, 2 * r.d_n + r.c_n);
}

#[test]
fn structure_algebra_entropy() {
    for x in battery() {
        for n in 1..=40 {
            let row = structure_row(&x, n).unwrap();
            let a = structure_algebra(&x, n).unwrap();
            let expected = (row.d_n + row.c_n) as f64 * LN_2;
            assert!((a.entropy() - expected).abs() < 1e-12);
            assert_eq!(a.rank_total(), 1u128 << (row.d_n + row.c_n));
        }
    }
}
