mod common;

use common::{compose, cycle_perm};
use cyclewalk::{replica_rng, ConjugacyClass};
use std::collections::HashMap;

/// Chi-square goodness of fit against the uniform law on the class.
fn chi_square(class: &ConjugacyClass, n: usize, draws: usize, seed: u64) -> (usize, f64) {
    let mut rng = replica_rng(seed, 0);
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for _ in 0..draws {
        let cycles = class.sample_step(n, &mut rng).unwrap();
        let mut p: Vec<u32> = (0..n as u32).collect();
        for c in &cycles {
            p = compose(&cycle_perm(n, c), &p);
        }
        *counts.entry(p).or_default() += 1;
    }
    let cells: usize = class.class_size(n).unwrap().try_into().unwrap();
    assert_eq!(counts.len(), cells);
    let e = draws as f64 / cells as f64;
    let stat = counts.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
    (cells, stat)
}

#[test]
fn three_cycles_on_four_points_are_uniform() {
    let (cells, stat) = chi_square(&ConjugacyClass::k_cycles(3), 4, 100_000, 17);
    assert_eq!(cells, 8);
    // 99th percentile of chi-square with 7 degrees of freedom
    assert!(stat < 18.475, "chi2 = {stat}");
}

#[test]
fn mixed_class_is_uniform() {
    // k2=1,k3=1 on 5 points: C(5,2) * 2 = 20 elements
    let class: ConjugacyClass = "k2=1,k3=1".parse().unwrap();
    let (cells, stat) = chi_square(&class, 5, 100_000, 5);
    assert_eq!(cells, 20);
    // 99th percentile with 19 degrees of freedom
    assert!(stat < 36.191, "chi2 = {stat}");
}

#[test]
fn sampled_cycles_start_at_their_minimum() {
    let class: ConjugacyClass = "k2=2,k4=1".parse().unwrap();
    let mut rng = replica_rng(2, 9);
    for _ in 0..1000 {
        let cycles = class.sample_step(30, &mut rng).unwrap();
        let lens: Vec<usize> = cycles.iter().map(Vec::len).collect();
        assert_eq!(lens, vec![4, 2, 2]);
        for c in &cycles {
            assert_eq!(c[0], *c.iter().min().unwrap());
        }
        let mut all: Vec<u32> = cycles.concat();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 8);
    }
}
