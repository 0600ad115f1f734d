mod common;

use common::{random_chain, rng};
use entropylab::{
    independence_check, markov_defect_sequence, nested_defect_check, Budget, MarkovSource,
};
use rand::Rng;

#[test]
fn defects_are_nonnegative() {
    let mut r = rng(21);
    for i in 0..20 {
        let src = random_chain(&mut r, 2 + i % 3);
        for p in 1..=3 {
            let seq = markov_defect_sequence(&src, p, &[p + 1, 8, 16, 64]).unwrap();
            for row in &seq.rows {
                assert!(row.h_static - row.h_dynamic >= -1e-10, "{row:?}");
                assert!(row.h_dynamic >= 0.0);
            }
        }
    }
}

#[test]
fn nested_inequality_on_random_instances() {
    let mut r = rng(22);
    for i in 0..20 {
        let k = 3 + i % 2;
        let src = random_chain(&mut r, k);
        let map: Vec<usize> = (0..k).map(|_| r.random_range(0..2)).collect();
        let p = 1 + i % 2;
        let n_list: Vec<usize> = ((p + 1)..=10).collect();
        let rep = nested_defect_check(&src, &map, p, &n_list, Budget::default()).unwrap();
        assert!(rep.holds, "instance {i}: {rep:?}");
    }
}

#[test]
fn independence_implies_vanishing_defect() {
    let mut r = rng(23);
    let mut battery = vec![
        MarkovSource::bernoulli(0.3).unwrap(),
        MarkovSource::iid(&[0.1, 0.6, 0.3]).unwrap(),
        MarkovSource::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap(),
        MarkovSource::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
    ];
    battery.extend((0..4).map(|i| random_chain(&mut r, 2 + i % 2)));
    for src in &battery {
        for p in 1..=3 {
            let ind = independence_check(src, p, 3, Budget::default()).unwrap();
            assert_eq!(ind.independent, src.is_iid(), "p = {p}: {ind:?}");
            if ind.independent {
                for q in p..=p + 2 {
                    let seq = markov_defect_sequence(src, q, &[q + 1, 10, 20]).unwrap();
                    for row in &seq.rows {
                        assert!((row.h_static - row.h_dynamic).abs() < 1e-10);
                    }
                }
            }
        }
    }
}
