#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;

use anderson_core::saw::{
    connective_upper_bounds, correlation, enumerate, susceptibility, LatticePoint, WalkSeries,
    DEFAULT_MEMORY_BUDGET,
};
use anderson_core::Sequential;
use proptest::prelude::*;

/// All (2d)^N nearest-neighbour paths from the origin, filtered for distinct
/// vertices; returns endpoint counts per length.
fn brute_force(d: usize, max_len: usize) -> Vec<BTreeMap<Vec<i32>, u128>> {
    let mut out = vec![BTreeMap::new(); max_len + 1];
    out[0].insert(vec![0; d], 1);
    for n in 1..=max_len {
        let total = (2 * d).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut path = vec![vec![0i32; d]];
            for _ in 0..n {
                let dir = c % (2 * d);
                c /= 2 * d;
                let mut next = path.last().unwrap().clone();
                next[dir / 2] += if dir.is_multiple_of(2) { 1 } else { -1 };
                path.push(next);
            }
            let mut sorted = path.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() == path.len() {
                *out[n].entry(path.last().unwrap().clone()).or_insert(0) += 1;
            }
        }
    }
    out
}

fn series(d: usize, n: usize) -> WalkSeries {
    enumerate(&Sequential, d, n, DEFAULT_MEMORY_BUDGET).unwrap()
}

fn check_against_brute_force(d: usize, n_max: usize) {
    let s = series(d, n_max);
    let brute = brute_force(d, n_max);
    for n in 0..=n_max {
        let total: u128 = brute[n].values().sum();
        assert_eq!(s.totals()[n], total, "d={d} n={n}");
        for (y, &count) in &brute[n] {
            assert_eq!(s.count(&LatticePoint::new(y.clone()), n), count, "d={d} n={n} y={y:?}");
        }
    }
    for (y, counts) in s.endpoints() {
        for (n, &c) in counts.iter().enumerate() {
            let b = brute[n].get(y.coords()).copied().unwrap_or(0);
            assert_eq!(c, b);
        }
    }
}

#[test]
fn square_lattice_matches_brute_force() {
    check_against_brute_force(2, 8);
}

#[test]
fn cubic_lattice_matches_brute_force() {
    check_against_brute_force(3, 6);
}

#[test]
fn low_order_terms_in_all_dimensions() {
    for d in 1..=6usize {
        let s = series(d, 2);
        assert_eq!(s.totals()[1], 2 * d as u128);
        assert_eq!(s.totals()[2], (2 * d * (2 * d - 1)) as u128);
    }
}

#[test]
fn correlation_frozen_value() {
    // Independent enumeration with exact rationals: sum_n 0.2^n #S_n((1,0), 0), n <= 12.
    let s = series(2, 12);
    let c = correlation(&s, 0.2, &LatticePoint::new(vec![1, 0])).unwrap();
    assert!((c.partial_sum() - 0.21836531712).abs() < 1e-14);
    let counts: Vec<u128> = (0..=12).map(|n| s.count(&LatticePoint::new(vec![1, 0]), n)).collect();
    assert_eq!(counts, vec![0, 1, 0, 2, 0, 6, 0, 28, 0, 140, 0, 744, 0]);
    assert!(c.converged());
}

#[test]
fn susceptibility_frozen_value() {
    let s = series(2, 10);
    let chi = susceptibility(&s, 0.1).unwrap();
    assert!((chi.partial_sum - 1.569917038).abs() < 1e-12);
    assert!(chi.converged);
    assert!(chi.tail_bound > 0.0 && chi.tail_bound < 1e-2);
}

#[test]
fn correlation_over_ball_equals_susceptibility() {
    for (d, n) in [(2, 10), (3, 6), (4, 4)] {
        let s = series(d, n);
        for gamma in [0.05, 0.2, 0.3] {
            let total: f64 = s
                .endpoints()
                .keys()
                .map(|p| correlation(&s, gamma, p).unwrap().partial_sum())
                .sum();
            let chi = susceptibility(&s, gamma).unwrap().partial_sum;
            assert!((total - chi).abs() <= 1e-12 * chi, "d={d} gamma={gamma}");
        }
    }
}

#[test]
fn truncation_brackets_the_longer_series() {
    // C_gamma from N = 8 plus its tail must contain the N = 14 partial sum.
    let short = series(2, 8);
    let long = series(2, 14);
    let gamma = 0.25;
    for y in [vec![0, 0], vec![1, 0], vec![2, 1], vec![3, 3]] {
        let p = LatticePoint::new(y);
        let a = correlation(&short, gamma, &p).unwrap();
        let b = correlation(&long, gamma, &p).unwrap();
        assert!(a.converged());
        assert!(a.partial_sum() <= b.partial_sum());
        assert!(b.partial_sum() <= a.partial_sum() + a.tail_bound());
    }
}

#[test]
fn cubic_connective_bound_respects_known_value() {
    let s = series(3, 10);
    let bounds = connective_upper_bounds(&s).unwrap();
    let (n, c10) = *bounds.bounds.last().unwrap();
    assert_eq!(n, 10);
    assert!(c10 >= 4.7114);
    assert!(c10 <= 6.0 * 5f64.powi(9).powf(0.1) * 1.0001);
    assert_eq!(bounds.trivial, 5.0);
}

#[test]
fn enumeration_does_not_depend_on_executor() {
    struct Reversed;
    impl anderson_core::Executor for Reversed {
        fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
        where
            T: Send,
            F: Fn(usize) -> T + Sync + Send,
        {
            let mut out: Vec<(usize, T)> = (0..n).rev().map(|i| (i, f(i))).collect();
            out.reverse();
            out.into_iter().map(|(_, t)| t).collect()
        }
    }
    let a = series(3, 7);
    let b = enumerate(&Reversed, 3, 7, DEFAULT_MEMORY_BUDGET).unwrap();
    assert_eq!(a, b);
}

fn signed_permutations(d: usize) -> Vec<(Vec<usize>, Vec<i32>)> {
    fn perms(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let head = rest.remove(i);
            for mut p in perms(rest) {
                p.insert(0, head);
                out.push(p);
            }
        }
        out
    }
    let mut out = Vec::new();
    for p in perms((0..d).collect()) {
        for mask in 0..(1u32 << d) {
            let signs = (0..d).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
            out.push((p.clone(), signs));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_invariants(d in 1usize..=4, n_max in 0usize..=7) {
        let s = series(d, n_max);
        let c = s.totals();
        prop_assert_eq!(c[0], 1);
        // submultiplicativity and the non-reversal bound, exactly
        for m in 0..=n_max {
            for n in 0..=(n_max - m) {
                prop_assert!(c[m + n] <= c[m] * c[n]);
            }
        }
        for n in 1..=n_max {
            prop_assert!(c[n] <= 2 * d as u128 * (2 * d as u128 - 1).pow(n as u32 - 1));
        }
        // endpoint sums and parity
        for n in 0..=n_max {
            let sum: u128 = s.endpoints().values().map(|v| v[n]).sum();
            prop_assert_eq!(sum, c[n]);
        }
        for (y, counts) in s.endpoints() {
            let norm = y.l1_norm() as usize;
            for (n, &k) in counts.iter().enumerate() {
                if norm > n || (norm + n) % 2 == 1 {
                    prop_assert_eq!(k, 0);
                }
            }
        }
        // hyperoctahedral symmetry
        for (perm, signs) in signed_permutations(d) {
            for (y, counts) in s.endpoints() {
                let image: Vec<i32> = (0..d).map(|k| signs[k] * y.coords()[perm[k]]).collect();
                prop_assert_eq!(s.endpoints().get(&LatticePoint::new(image)), Some(counts));
            }
        }
    }

    #[test]
    fn partial_sums_grow_with_truncation(gamma in 0.0f64..0.5, y0 in -3i32..=3, y1 in -3i32..=3) {
        let p = LatticePoint::new(vec![y0, y1]);
        let mut prev = 0.0;
        for n in 0..=9 {
            let v = correlation(&series(2, n), gamma, &p).unwrap().partial_sum();
            prop_assert!(v >= prev);
            prev = v;
        }
    }
}
