mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use spinforge::refocus::lp::EqualityLp;
use spinforge::refocus::{
    assign_patterns, compile_program, lp_schedule, refocus, verify_schedule, walsh, walsh_product, CouplingTargets,
    ScheduleOptions,
};
use spinforge::SpinSystem;

/// Walsh rows by brute force: natural Hadamard rows sorted by sign changes.
fn walsh_by_sorting(len: usize) -> Vec<Vec<i8>> {
    let mut rows: Vec<Vec<i8>> = (0..len)
        .map(|h| (0..len).map(|b| if (h & b).count_ones() % 2 == 0 { 1 } else { -1 }).collect())
        .collect();
    rows.sort_by_key(|r: &Vec<i8>| r.windows(2).filter(|w| w[0] != w[1]).count());
    rows
}

#[test]
fn walsh_matches_sorted_hadamard() {
    for len in [2, 4, 16, 64] {
        let oracle = walsh_by_sorting(len);
        for (n, row) in oracle.iter().enumerate() {
            assert_eq!(&walsh(n, len).unwrap().values, row);
        }
    }
}

/// LP optimum by enumerating basic solutions.
fn vertex_optimum(lp: &EqualityLp) -> f64 {
    let n = lp.cost.len();
    let a = DMatrix::from_fn(lp.rows.len(), n, |i, j| lp.rows[i][j]);
    // Keep an independent row subset.
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..lp.rows.len() {
        let mut trial = keep.clone();
        trial.push(i);
        let sub = DMatrix::from_fn(trial.len(), n, |r, j| a[(trial[r], j)]);
        if sub.rank(1e-9) == trial.len() {
            keep = trial;
        }
    }
    let m = keep.len();
    let mut best = f64::INFINITY;
    let mut cols: Vec<usize> = (0..m).collect();
    loop {
        let basis = DMatrix::from_fn(m, m, |r, k| a[(keep[r], cols[k])]);
        let rhs = DVector::from_fn(m, |r, _| lp.rhs[keep[r]]);
        if let Some(x) = basis.clone().lu().solve(&rhs) {
            if (basis * &x - &rhs).norm() < 1e-9 && x.iter().all(|&v| v >= -1e-12) {
                let obj: f64 = cols.iter().zip(x.iter()).map(|(&c, v)| lp.cost[c] * v).sum();
                best = best.min(obj);
            }
        }
        // Next combination.
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if cols[i] < n - m + i {
                cols[i] += 1;
                for k in i + 1..m {
                    cols[k] = cols[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_system(q: usize, rng: &mut rand_chacha::ChaCha8Rng) -> SpinSystem {
    let offsets: Vec<f64> = (0..q).map(|_| rng.random_range(-2000.0..2000.0)).collect();
    let mut coup = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            if rng.random_bool(0.75) {
                let mag = rng.random_range(20.0..200.0);
                coup.push(((i, j), if rng.random_bool(0.5) { mag } else { -mag }));
            }
        }
    }
    SpinSystem::homonuclear("1H", &offsets, coup).unwrap()
}

fn random_targets(sys: &SpinSystem, rng: &mut rand_chacha::ChaCha8Rng) -> CouplingTargets {
    let mut out = CouplingTargets::new();
    for &k in sys.couplings().keys() {
        if rng.random_bool(0.5) {
            out.insert(k, rng.random_range(-PI..PI));
        }
    }
    out
}

fn schedule_lp(sys: &SpinSystem, targets: &CouplingTargets) -> EqualityLp {
    let a = assign_patterns(sys.len()).unwrap();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (&(i, j), &jhz) in sys.couplings() {
        rows.push(a.coupling_pattern(i, j).iter().map(|&s| s as f64 * PI * jhz).collect());
        rhs.push(targets.get(&(i, j)).copied().unwrap_or(0.0));
    }
    for p in &a.patterns {
        rows.push(p.iter().map(|&s| s as f64).collect());
        rhs.push(0.0);
    }
    EqualityLp {
        cost: vec![1.0; a.n_bins()],
        rows,
        rhs,
        labels: vec![],
    }
}

#[test]
fn schedule_optimum_matches_vertex_enumeration() {
    let mut rng = common::rng(31);
    for _ in 0..40 {
        let q = rng.random_range(2..=3);
        let sys = random_system(q, &mut rng);
        let targets = random_targets(&sys, &mut rng);
        let expect = vertex_optimum(&schedule_lp(&sys, &targets));
        let got = lp_schedule(sys.couplings(), &targets, &assign_patterns(q).unwrap(), ScheduleOptions::default())
            .unwrap()
            .total_time();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }
}

#[test]
fn random_instances_verify() {
    let mut rng = common::rng(7);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let q = 2 + case % 4;
        let sys = random_system(q, &mut rng);
        let targets = random_targets(&sys, &mut rng);
        let z: Vec<f64> = (0..q)
            .map(|_| if rng.random_bool(0.3) { rng.random_range(-PI..PI) } else { 0.0 })
            .collect();
        let symmetrize = case % 5 == 0;
        let (schedule, program) = refocus(&sys, &targets, &z, ScheduleOptions { symmetrize }).unwrap();
        for (&(i, j), &jhz) in sys.couplings() {
            let want = targets.get(&(i, j)).copied().unwrap_or(0.0);
            assert!((PI * jhz * schedule.coupling_time(i, j) - want).abs() < 1e-10);
        }
        worst = worst.max(verify_schedule(&sys, &program, &targets, &z).unwrap());
    }
    assert!(worst <= 1e-10, "worst infidelity {worst}");
}

fn two_of_three(j13: f64) -> f64 {
    let mut c = vec![((0, 1), 120.0), ((1, 2), 120.0)];
    if j13 != 0.0 {
        c.push(((0, 2), j13));
    }
    let sys = SpinSystem::homonuclear("1H", &[100.0, 900.0, -400.0], c).unwrap();
    let targets: CouplingTargets = [((0, 1), PI / 2.0), ((1, 2), PI / 2.0)].into();
    let (s, p) = refocus(&sys, &targets, &[], ScheduleOptions::default()).unwrap();
    assert!(verify_schedule(&sys, &p, &targets, &[]).unwrap() < 1e-10);
    s.total_time()
}

#[test]
fn fully_coupled_triple_cannot_share_time() {
    let single = 1.0 / (2.0 * 120.0);
    for j13 in [120.0, 35.0, -70.0] {
        let t = two_of_three(j13);
        assert!((t - 2.0 * single).abs() < 1e-9, "J13={j13}: {t}");
    }
}

#[test]
fn open_chain_shares_time() {
    // Spins 1 and 3 may toggle together when they do not couple.
    let t = two_of_three(0.0);
    assert!((t - 1.0 / 240.0).abs() < 1e-9, "{t}");
}

#[test]
fn disjoint_pairs_run_in_parallel() {
    let sys = SpinSystem::homonuclear(
        "1H",
        &[0.0, 400.0, 800.0, 1200.0],
        [((0, 1), 100.0), ((2, 3), 60.0), ((1, 2), 30.0)],
    )
    .unwrap();
    let targets: CouplingTargets = [((0, 1), PI / 2.0), ((2, 3), PI / 4.0)].into();
    let (s, p) = refocus(&sys, &targets, &[], ScheduleOptions::default()).unwrap();
    let t12: f64 = 0.5 / 100.0;
    let t34 = 0.25 / 60.0;
    assert!((s.total_time() - t12.max(t34)).abs() < 1e-9);
    assert!(verify_schedule(&sys, &p, &targets, &[]).unwrap() < 1e-10);
}

#[test]
fn perturbed_duration_is_detected() {
    let sys = SpinSystem::homonuclear(
        "1H",
        &[150.0, -700.0, 1300.0, 40.0],
        [((0, 1), 80.0), ((1, 2), 50.0), ((2, 3), 110.0), ((0, 3), 10.0)],
    )
    .unwrap();
    let targets: CouplingTargets = [((0, 1), 1.1), ((2, 3), -0.6)].into();
    let (mut s, p) = refocus(&sys, &targets, &[], ScheduleOptions::default()).unwrap();
    assert!(verify_schedule(&sys, &p, &targets, &[]).unwrap() < 1e-10);
    let b = s.durations.iter().position(|&t| t > 0.0).unwrap();
    s.durations[b] *= 1.01;
    let p2 = compile_program(&s, &[]).unwrap();
    assert!(verify_schedule(&sys, &p2, &targets, &[]).unwrap() > 1e-6);
}

#[test]
fn symmetrized_schedule_is_no_longer() {
    let mut rng = common::rng(5);
    for _ in 0..30 {
        let sys = random_system(4, &mut rng);
        let targets = random_targets(&sys, &mut rng);
        let a = assign_patterns(4).unwrap();
        let plain = lp_schedule(sys.couplings(), &targets, &a, ScheduleOptions::default()).unwrap();
        let sym = lp_schedule(sys.couplings(), &targets, &a, ScheduleOptions { symmetrize: true }).unwrap();
        assert!(sym.total_time() <= plain.total_time() + 1e-12);
    }
}

#[test]
fn empty_program_matches_zero_targets() {
    let sys = SpinSystem::homonuclear("1H", &[10.0, 20.0], [((0, 1), 5.0)]).unwrap();
    let (_, p) = refocus(&sys, &BTreeMap::new(), &[], ScheduleOptions::default()).unwrap();
    assert!(p.ops.is_empty());
    assert_eq!(verify_schedule(&sys, &p, &BTreeMap::new(), &[]).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn schur_product_law(bits in 0u32..=6, m in 0usize..64, n in 0usize..64) {
        let len = 1usize << bits;
        let (m, n) = (m % len, n % len);
        let k = walsh_product(m, n).unwrap();
        prop_assert_eq!(k, m ^ n);
        let prod = walsh(m, len).unwrap().schur(&walsh(n, len).unwrap());
        prop_assert_eq!(prod, walsh(k, len).unwrap().values);
    }

    #[test]
    fn optimum_invariant_under_bin_permutation(seed in 0u64..1000, q in 2usize..5) {
        let mut rng = common::rng(seed);
        let sys = random_system(q, &mut rng);
        let targets = random_targets(&sys, &mut rng);
        let a = assign_patterns(q).unwrap();
        let mut perm: Vec<usize> = (0..a.n_bins()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let base = lp_schedule(sys.couplings(), &targets, &a, ScheduleOptions::default()).unwrap();
        let shuffled = lp_schedule(sys.couplings(), &targets, &a.permuted(&perm).unwrap(), ScheduleOptions::default()).unwrap();
        prop_assert!((base.total_time() - shuffled.total_time()).abs() < 1e-12);
    }
}
