mod common;

use proptest::prelude::*;
use spinforge::linalg::{self, max_abs_diff, CMatrix};
use spinforge::pps::{
    crush, excited_cyclic_permutations, permute_populations, pps_crotonic_chain, pps_two_spin_heteronuclear,
    pps_two_spin_homonuclear, pseudo_purity, run_sequence, temporal_average, temporal_average_by_permutation,
    two_spin_heteronuclear_steps, two_spin_homonuclear_steps, DensityState, Normalization, PpsStep,
};
use spinforge::spinsys::{coherence_orders, iz_diagonal, spin_op_matrix, Axis};
use spinforge::{Spin, SpinSystem};

fn homo2() -> SpinSystem {
    SpinSystem::homonuclear("1H", &[0.0, 420.0], [((0, 1), 7.0)]).unwrap()
}

fn hetero2() -> SpinSystem {
    SpinSystem::new(vec![Spin::new("H", "1H", 0.0), Spin::new("C", "13C", 0.0)], [((0, 1), 140.0)]).unwrap()
}

fn crotonic() -> SpinSystem {
    SpinSystem::homonuclear(
        "1H",
        &[-1500.0, -600.0, 300.0, 1800.0],
        [((0, 1), 72.0), ((1, 2), 69.0), ((2, 3), 35.0), ((0, 2), 1.5), ((1, 3), 7.0)],
    )
    .unwrap()
}

fn iz(q: usize, k: usize) -> CMatrix {
    spin_op_matrix(q, k, Axis::Z)
}

fn zz(q: usize, i: usize, j: usize) -> CMatrix {
    (iz(q, i) * iz(q, j)).scale(2.0)
}

/// Sorted eigenvalues of E/N + s·Δ.
fn spectrum(rho: &DensityState, s: f64) -> Vec<f64> {
    let n = rho.dim();
    let m = linalg::identity(n).scale(1.0 / n as f64) + rho.matrix().scale(s);
    linalg::eigh(&m).values.iter().copied().collect()
}

#[test]
fn homonuclear_pair_intermediate_and_output() {
    let run = pps_two_spin_homonuclear(&homo2()).unwrap();
    let after_crush = &run.stages[2].1;
    assert!((after_crush.coefficient(&iz(2, 0)) - 1.0).abs() < 1e-12);
    assert!((after_crush.coefficient(&iz(2, 1)) - 0.5).abs() < 1e-12);
    let out = run.output();
    let expect = (iz(2, 0) + iz(2, 1) + zz(2, 0, 1)).scale(0.5);
    assert!(max_abs_diff(out.matrix(), &expect) < 1e-12);
    for op in [iz(2, 0), iz(2, 1), zz(2, 0, 1)] {
        assert!((out.coefficient(&op) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn homonuclear_pair_product_operator_line() {
    // After 45°I_-y: ½I_z − ½I_x + ½·2I_xS_z + ½·2I_zS_z + ½S_z.
    let run = pps_two_spin_homonuclear(&homo2()).unwrap();
    let before = &run.stages[5].1;
    let ix = spin_op_matrix(2, 0, Axis::X);
    let expect = (iz(2, 0) - &ix + (&ix * iz(2, 1)).scale(2.0) + zz(2, 0, 1) + iz(2, 1)).scale(0.5);
    assert!(max_abs_diff(before.matrix(), &expect) < 1e-12);
}

#[test]
fn homonuclear_pair_spectrum_has_three_equal() {
    let out = pps_two_spin_homonuclear(&homo2()).unwrap();
    let ev = spectrum(out.output(), 0.05);
    assert!((ev[0] - ev[1]).abs() < 1e-12 && (ev[1] - ev[2]).abs() < 1e-12);
    assert!(ev[3] > ev[2] + 1e-3);
    let p = pseudo_purity(&out.output().to_density(0.05).unwrap()).unwrap();
    assert!(p.is_pps && p.target_index == 0);
}

#[test]
fn heteronuclear_pair_coefficient() {
    let run = pps_two_spin_heteronuclear(&hetero2()).unwrap();
    let out = run.output();
    let k = (3.0f64 / 8.0).sqrt();
    let expect = (iz(2, 0) + iz(2, 1) + zz(2, 0, 1)).scale(k);
    assert!(max_abs_diff(out.matrix(), &expect) < 1e-12);
    // Zero-quantum terms were present and removed.
    assert!(run.zq_before_crush.iter().all(|&a| a == 0.0));
    let pre = &run.stages[3].1;
    assert!(pre.matrix()[(1, 2)].norm() > 1e-3);
    assert_eq!(out.matrix()[(1, 2)].norm(), 0.0);
}

#[test]
fn heteronuclear_sequence_on_homonuclear_pair_leaves_zero_quantum() {
    let sys = homo2();
    let rho = DensityState::thermal_deviation(&sys, None).unwrap();
    let run = run_sequence(&sys, &rho, &two_spin_heteronuclear_steps(), false).unwrap();
    assert!(run.zq_before_crush[0] > 1e-3);
    assert!(run.output().matrix()[(1, 2)].norm() > 1e-3);
    assert!(run_sequence(&sys, &rho, &two_spin_heteronuclear_steps(), true).is_err());
}

#[test]
fn crotonic_chain_gives_pseudo_pure_state() {
    let run = pps_crotonic_chain(&crotonic()).unwrap();
    assert_eq!(run.zq_before_crush.len(), 4);
    assert!(run.zq_before_crush.iter().all(|&a| a <= 1e-10));
    let adjusted = &run.stages[4].1;
    for (k, w) in [1.0, 0.5, 0.25, 0.125].iter().enumerate() {
        assert!((adjusted.coefficient(&iz(4, k)) - w).abs() < 1e-12);
    }
    let ev = spectrum(run.output(), 0.01);
    for v in &ev[..15] {
        assert!((v - ev[0]).abs() < 1e-10);
    }
    assert!(ev[15] > ev[14] + 1e-4);
    let p = pseudo_purity(&run.output().to_density(0.01).unwrap()).unwrap();
    assert!(p.is_pps && p.target_index == 0);
}

#[test]
fn crotonic_angles() {
    assert!((0.25f64.acos().to_degrees() - 75.52).abs() < 0.01);
    assert!((0.125f64.acos().to_degrees() - 82.82).abs() < 0.01);
    let three = SpinSystem::homonuclear("1H", &[0.0, 1.0, 2.0], [((0, 1), 5.0), ((1, 2), 5.0)]).unwrap();
    assert!(pps_crotonic_chain(&three).is_err());
    let broken = SpinSystem::homonuclear("1H", &[0.0, 1.0, 2.0, 3.0], [((0, 1), 5.0), ((2, 3), 5.0)]).unwrap();
    assert!(pps_crotonic_chain(&broken).is_err());
}

#[test]
fn final_frame_rotation_is_irrelevant() {
    for (sys, mut steps) in [(homo2(), two_spin_homonuclear_steps()), (hetero2(), two_spin_heteronuclear_steps())] {
        let rho = DensityState::thermal_deviation(&sys, None).unwrap();
        let base = run_sequence(&sys, &rho, &steps, false).unwrap();
        let at = steps.len() - 1;
        steps.insert(at, PpsStep::ZRotation { spin: 0, angle: 0.83 });
        steps.insert(at, PpsStep::ZRotation { spin: 1, angle: -2.1 });
        let rotated = run_sequence(&sys, &rho, &steps, false).unwrap();
        assert!(max_abs_diff(base.output().matrix(), rotated.output().matrix()) < 1e-12);
    }
}

/// Populations of E/N + s·Δ for a diagonal deviation.
fn populations(rho: &DensityState, s: f64) -> Vec<f64> {
    (0..rho.dim()).map(|i| 1.0 / rho.dim() as f64 + s * rho.matrix()[(i, i)].re).collect()
}

#[test]
fn temporal_averaging_equalizes_excited_populations() {
    for (sys, pol) in [(homo2(), [1.0, 1.0]), (hetero2(), [1.0, 0.25])] {
        let thermal = DensityState::thermal_deviation(&sys, Some(&pol)).unwrap();
        let avg = temporal_average_by_permutation(&thermal).unwrap();
        let pop = populations(&avg, 0.1);
        assert!((pop[1] - pop[2]).abs() < 1e-15 && (pop[2] - pop[3]).abs() < 1e-15);
        assert!(pop[0] > pop[1]);
        assert!(pseudo_purity(&avg.to_density(0.1).unwrap()).unwrap().is_pps);
        let raw = populations(&thermal, 0.1);
        let mean_excited = (raw[1] + raw[2] + raw[3]) / 3.0;
        assert!((pop[1] - mean_excited).abs() < 1e-15);
    }
}

#[test]
fn averaging_identical_states_is_identity() {
    let rho = DensityState::thermal_deviation(&crotonic(), None).unwrap();
    let avg = temporal_average(&[rho.clone(), rho.clone(), rho.clone()]).unwrap();
    assert!(max_abs_diff(avg.matrix(), rho.matrix()) < 1e-15);
}

#[test]
fn permutation_moves_populations() {
    let rho = DensityState::thermal_deviation(&homo2(), None).unwrap();
    let p = &excited_cyclic_permutations(4)[0];
    let moved = permute_populations(&rho, p).unwrap();
    for (old, &new) in p.iter().enumerate() {
        assert_eq!(moved.matrix()[(new, new)], rho.matrix()[(old, old)]);
    }
    assert!(permute_populations(&rho, &[0, 0, 1, 2]).is_err());
}

fn random_density(n: usize, seed: u64) -> DensityState {
    let mut rng = common::rng(seed);
    DensityState::new(linalg::random::density(n, &mut rng), Normalization::Density).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn crush_is_idempotent_trace_preserving_and_psd(seed in 0u64..10_000, hetero in proptest::bool::ANY) {
        let sys = if hetero {
            SpinSystem::new(
                vec![Spin::new("H", "1H", 0.0), Spin::new("C", "13C", 0.0), Spin::new("H2", "1H", 50.0)],
                [((0, 1), 140.0)],
            ).unwrap()
        } else {
            SpinSystem::homonuclear("1H", &[0.0, 50.0, 90.0], []).unwrap()
        };
        let t = coherence_orders(&sys);
        let rho = random_density(8, seed);
        let once = crush(&rho, &t).unwrap();
        let twice = crush(&once, &t).unwrap();
        prop_assert!(max_abs_diff(once.matrix(), twice.matrix()) == 0.0);
        prop_assert!((linalg::trace(once.matrix()).re - 1.0).abs() < 1e-12);
        let ev_in = linalg::eigh(rho.matrix()).values;
        let ev = linalg::eigh(once.matrix()).values;
        prop_assert!(ev[0] >= -1e-12);
        prop_assert!(ev[0] >= ev_in[0] - 1e-12 && ev[7] <= ev_in[7] + 1e-12);
    }

    #[test]
    fn temporal_average_commutes_with_gates(seed in 0u64..10_000) {
        let mut rng = common::rng(seed);
        let states: Vec<DensityState> = (0..3).map(|k| random_density(4, seed * 3 + k)).collect();
        let u = linalg::random::unitary(4, &mut rng);
        let a = temporal_average(&states).unwrap().evolve(&u);
        let gated: Vec<DensityState> = states.iter().map(|s| s.evolve(&u)).collect();
        let b = temporal_average(&gated).unwrap();
        prop_assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
    }
}

#[test]
fn thermal_deviation_matches_iz_sum() {
    let sys = crotonic();
    let rho = DensityState::thermal_deviation(&sys, None).unwrap();
    let d: Vec<f64> = (0..16).map(|r| (0..4).map(|k| iz_diagonal(4, k)[r]).sum()).collect();
    assert!(max_abs_diff(rho.matrix(), &linalg::diag_matrix(&d)) == 0.0);
}
