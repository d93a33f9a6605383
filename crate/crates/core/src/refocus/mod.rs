//! Walsh-pattern refocusing: schedule coupling evolution under a fixed
//! drift so that chosen zz terms survive and every offset is removed.

pub mod lp;
mod walsh;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fid::unitary_fidelity;
use crate::linalg::{c, CMatrix};
use crate::operator::{OpKind, Operator};
use crate::spinsys::{drift_diagonal, iz_diagonal, spin_mask, SpinSystem};
use lp::EqualityLp;

pub use walsh::{assign_patterns, walsh, walsh_product, PatternAssignment, WalshPattern};

/// Target zz angles θ_kl in exp(−iθ_kl·2I_zI_z), keyed by (k, l) with k < l.
pub type CouplingTargets = BTreeMap<(usize, usize), f64>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScheduleOptions {
    /// Drop the offset constraints and instead replay the bins reversed with
    /// every spin inverted.
    pub symmetrize: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefocusSchedule {
    pub assignment: PatternAssignment,
    /// Seconds per bin.
    pub durations: Vec<f64>,
    pub targets: CouplingTargets,
    pub symmetrized: bool,
}

impl RefocusSchedule {
    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Σ_b s_b t_b for the pair, in seconds.
    pub fn coupling_time(&self, i: usize, j: usize) -> f64 {
        self.assignment
            .coupling_pattern(i, j)
            .iter()
            .zip(&self.durations)
            .map(|(&s, t)| s as f64 * t)
            .sum()
    }
}

fn check_targets(n: usize, couplings: &BTreeMap<(usize, usize), f64>, targets: &CouplingTargets) -> Result<()> {
    for (&(i, j), &theta) in targets {
        if i >= j || j >= n {
            return Err(Error::InvalidArgument(format!(
                "target pair ({}, {}) must be two distinct spins below {n}",
                i + 1,
                j + 1
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("target ({}, {}) is not finite", i + 1, j + 1)));
        }
        if theta != 0.0 && couplings.get(&(i, j)).copied().unwrap_or(0.0) == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "target on spins {} and {} needs a nonzero coupling",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

/// Minimum total time bin durations reproducing every target angle.
/// Couplings are in Hz; untargeted coupled pairs are refocused to zero.
pub fn lp_schedule(
    couplings: &BTreeMap<(usize, usize), f64>,
    targets: &CouplingTargets,
    assignment: &PatternAssignment,
    options: ScheduleOptions,
) -> Result<RefocusSchedule> {
    let n = assignment.n_spins();
    check_targets(n, couplings, targets)?;
    let bins = assignment.n_bins();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut labels = Vec::new();
    for (&(i, j), &jhz) in couplings {
        if jhz == 0.0 || j >= n {
            continue;
        }
        let scale = std::f64::consts::PI * jhz;
        rows.push(assignment.coupling_pattern(i, j).iter().map(|&s| s as f64 * scale).collect());
        rhs.push(targets.get(&(i, j)).copied().unwrap_or(0.0));
        labels.push(format!("coupling {},{}", i + 1, j + 1));
    }
    if !options.symmetrize {
        for (k, row) in assignment.patterns.iter().enumerate() {
            rows.push(row.iter().map(|&s| s as f64).collect());
            rhs.push(0.0);
            labels.push(format!("offset {}", k + 1));
        }
    }
    let durations = if rows.is_empty() {
        vec![0.0; bins]
    } else {
        EqualityLp {
            cost: vec![1.0; bins],
            rows,
            rhs,
            labels,
        }
        .solve()?
        .x
    };
    Ok(RefocusSchedule {
        assignment: assignment.clone(),
        durations,
        targets: targets.clone(),
        symmetrized: options.symmetrize,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProgramOp {
    Delay(f64),
    /// Instantaneous 180° on one spin about the axis at `phase_deg`.
    Pulse180 { spin: usize, phase_deg: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefocusProgram {
    pub n_spins: usize,
    pub ops: Vec<ProgramOp>,
}

impl RefocusProgram {
    pub fn duration(&self) -> f64 {
        self.ops
            .iter()
            .map(|op| match op {
                ProgramOp::Delay(t) => *t,
                _ => 0.0,
            })
            .sum()
    }

    pub fn pulse_count(&self, spin: usize) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, ProgramOp::Pulse180 { spin: s, .. } if *s == spin))
            .count()
    }

    fn push_delay(&mut self, t: f64) {
        if t <= 0.0 {
            return;
        }
        if let Some(ProgramOp::Delay(d)) = self.ops.last_mut() {
            *d += t;
        } else {
            self.ops.push(ProgramOp::Delay(t));
        }
    }
}

/// Emits 180° pulses wherever a spin's toggling sign must change, then
/// restores every spin. A z rotation ζ_k is carried by giving spin k's last
/// pulse the phase ζ_k/2.
pub fn compile_program(schedule: &RefocusSchedule, z_angles: &[f64]) -> Result<RefocusProgram> {
    let a = &schedule.assignment;
    let n = a.n_spins();
    if !z_angles.is_empty() && z_angles.len() != n {
        return Err(Error::DimensionMismatch(z_angles.len(), n));
    }
    if schedule.durations.len() != a.n_bins() {
        return Err(Error::DimensionMismatch(schedule.durations.len(), a.n_bins()));
    }
    let live: Vec<usize> = (0..a.n_bins()).filter(|&b| schedule.durations[b] > 0.0).collect();
    // (bin, sign multiplier, time factor)
    let mut plan: Vec<(usize, i8, f64)> = Vec::new();
    if schedule.symmetrized {
        plan.extend(live.iter().map(|&b| (b, 1, 0.5)));
        plan.extend(live.iter().rev().map(|&b| (b, -1, 0.5)));
    } else {
        plan.extend(live.iter().map(|&b| (b, 1, 1.0)));
    }

    let mut prog = RefocusProgram { n_spins: n, ops: Vec::new() };
    let mut sign = vec![1i8; n];
    for (b, flip, factor) in plan {
        for k in 0..n {
            let want = a.patterns[k][b] * flip;
            if want != sign[k] {
                prog.ops.push(ProgramOp::Pulse180 { spin: k, phase_deg: 0.0 });
                sign[k] = want;
            }
        }
        prog.push_delay(schedule.durations[b] * factor);
    }
    for (k, s) in sign.iter().enumerate() {
        if *s < 0 {
            prog.ops.push(ProgramOp::Pulse180 { spin: k, phase_deg: 0.0 });
        }
    }
    for k in 0..n {
        if !prog.pulse_count(k).is_multiple_of(2) {
            return Err(Error::Internal(format!("spin {} ends with an odd number of pulses", k + 1)));
        }
    }

    for (k, &zeta) in z_angles.iter().enumerate() {
        if zeta == 0.0 {
            continue;
        }
        if !zeta.is_finite() {
            return Err(Error::InvalidArgument(format!("z angle on spin {} is not finite", k + 1)));
        }
        let phase = (zeta / 2.0).to_degrees();
        let last = prog
            .ops
            .iter_mut()
            .rev()
            .find(|op| matches!(op, ProgramOp::Pulse180 { spin, .. } if *spin == k));
        match last {
            Some(ProgramOp::Pulse180 { phase_deg, .. }) => *phase_deg = phase,
            _ => {
                prog.ops.push(ProgramOp::Pulse180 { spin: k, phase_deg: 0.0 });
                prog.ops.push(ProgramOp::Pulse180 { spin: k, phase_deg: phase });
            }
        }
    }
    Ok(prog)
}

/// Left-multiplies `u` by exp(−iπ(cosφ I_x + sinφ I_y)) on spin k.
pub(crate) fn apply_pi_pulse(u: &mut CMatrix, q: usize, k: usize, phase: f64) {
    let mask = spin_mask(q, k);
    let (s, co) = phase.sin_cos();
    // |0⟩ → −i e^{iφ}|1⟩, |1⟩ → −i e^{−iφ}|0⟩
    let up = c(s, -co);
    let down = c(-s, -co);
    for r in 0..u.nrows() {
        if r & mask != 0 {
            continue;
        }
        let r1 = r | mask;
        for col in 0..u.ncols() {
            let a0 = u[(r, col)];
            let a1 = u[(r1, col)];
            u[(r1, col)] = up * a0;
            u[(r, col)] = down * a1;
        }
    }
}

/// Exact propagator of a program: delays under the full drift, ideal pulses.
pub fn program_propagator(system: &SpinSystem, program: &RefocusProgram) -> Result<Operator> {
    let q = system.len();
    if program.n_spins != q {
        return Err(Error::DimensionMismatch(program.n_spins, q));
    }
    let d = drift_diagonal(system);
    let mut u = crate::linalg::identity(system.dim());
    for op in &program.ops {
        match *op {
            ProgramOp::Delay(t) => {
                for (r, &e) in d.iter().enumerate() {
                    let ph = c(0.0, -e * t).exp();
                    for col in 0..u.ncols() {
                        u[(r, col)] *= ph;
                    }
                }
            }
            ProgramOp::Pulse180 { spin, phase_deg } => {
                if spin >= q {
                    return Err(Error::SpinIndex { index: spin, count: q });
                }
                apply_pi_pulse(&mut u, q, spin, phase_deg.to_radians());
            }
        }
    }
    Ok(Operator::from_parts(u, OpKind::Unitary))
}

/// exp(−i Σ θ_kl 2I_zI_z − i Σ ζ_k I_z).
pub fn target_propagator(q: usize, targets: &CouplingTargets, z_angles: &[f64]) -> Result<Operator> {
    let dim = 1usize << q;
    let mut phase = vec![0.0; dim];
    for (&(i, j), &theta) in targets {
        if j >= q || i >= j {
            return Err(Error::InvalidArgument(format!("target pair ({}, {}) out of range", i + 1, j + 1)));
        }
        let (zi, zj) = (iz_diagonal(q, i), iz_diagonal(q, j));
        for r in 0..dim {
            phase[r] += theta * 2.0 * zi[r] * zj[r];
        }
    }
    for (k, &zeta) in z_angles.iter().enumerate() {
        let z = iz_diagonal(q, k);
        for r in 0..dim {
            phase[r] += zeta * z[r];
        }
    }
    let m = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
        dim,
        phase.iter().map(|p| c(0.0, -p).exp()),
    ));
    Ok(Operator::from_parts(m, OpKind::Unitary))
}

/// Gate infidelity of the compiled program against the target evolution.
pub fn verify_schedule(system: &SpinSystem, program: &RefocusProgram, targets: &CouplingTargets, z_angles: &[f64]) -> Result<f64> {
    let u = program_propagator(system, program)?;
    let t = target_propagator(system.len(), targets, z_angles)?;
    Ok((1.0 - unitary_fidelity(&t, &u)?).max(0.0))
}

/// Assigns patterns, solves the schedule and compiles it in one go.
pub fn refocus(
    system: &SpinSystem,
    targets: &CouplingTargets,
    z_angles: &[f64],
    options: ScheduleOptions,
) -> Result<(RefocusSchedule, RefocusProgram)> {
    let assignment = assign_patterns(system.len())?;
    let schedule = lp_schedule(system.couplings(), targets, &assignment, options)?;
    let program = compile_program(&schedule, z_angles)?;
    Ok((schedule, program))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, max_abs_diff};
    use crate::spinsys::{spin_op_matrix, Axis};
    use std::f64::consts::PI;

    #[test]
    fn pi_pulse_matches_exponential() {
        let q = 3;
        for k in 0..q {
            for phi in [0.0f64, 0.7, -2.0] {
                let h = spin_op_matrix(q, k, Axis::X).scale(phi.cos()) + spin_op_matrix(q, k, Axis::Y).scale(phi.sin());
                let expect = expm_hermitian(&h, PI);
                let mut u = crate::linalg::identity(8);
                apply_pi_pulse(&mut u, q, k, phi);
                assert!(max_abs_diff(&u, &expect) < 1e-14);
            }
        }
    }

    fn pair_schedule(theta: f64, j: f64) -> (SpinSystem, RefocusSchedule) {
        let sys = SpinSystem::homonuclear("1H", &[300.0, -120.0], [((0, 1), j)]).unwrap();
        let targets: CouplingTargets = [((0, 1), theta)].into();
        let s = lp_schedule(sys.couplings(), &targets, &assign_patterns(2).unwrap(), ScheduleOptions::default()).unwrap();
        (sys, s)
    }

    #[test]
    fn single_coupling_takes_half_over_j() {
        let (_, s) = pair_schedule(PI / 2.0, 100.0);
        assert!((s.total_time() - 5e-3).abs() < 1e-12);
    }

    #[test]
    fn w1_pulses_after_second_and_fourth_bin() {
        let a = assign_patterns(2).unwrap();
        let s = RefocusSchedule {
            assignment: a,
            durations: vec![1.0; 4],
            targets: CouplingTargets::new(),
            symmetrized: false,
        };
        let p = compile_program(&s, &[]).unwrap();
        // Spin 1 carries W1 = (+,+,−,−).
        let mut elapsed = 0.0;
        let mut at = Vec::new();
        for op in &p.ops {
            match op {
                ProgramOp::Delay(t) => elapsed += t,
                ProgramOp::Pulse180 { spin: 0, .. } => at.push(elapsed),
                _ => {}
            }
        }
        assert_eq!(at, vec![2.0, 4.0]);
    }

    #[test]
    fn zero_targets_give_empty_program() {
        let (_, s) = pair_schedule(0.0, 100.0);
        assert_eq!(s.total_time(), 0.0);
        let p = compile_program(&s, &[]).unwrap();
        assert!(p.ops.is_empty());
    }

    #[test]
    fn z_rotation_sets_last_pulse_phase() {
        let (sys, s) = pair_schedule(PI / 2.0, 100.0);
        let p = compile_program(&s, &[PI / 2.0, 0.0]).unwrap();
        let phases: Vec<f64> = p
            .ops
            .iter()
            .filter_map(|op| match op {
                ProgramOp::Pulse180 { spin: 0, phase_deg } => Some(*phase_deg),
                _ => None,
            })
            .collect();
        assert!((phases[phases.len() - 1] - phases[phases.len() - 2] - 45.0).abs() < 1e-12);
        let t: CouplingTargets = [((0, 1), PI / 2.0)].into();
        assert!(verify_schedule(&sys, &p, &t, &[PI / 2.0, 0.0]).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_target_without_coupling() {
        let sys = SpinSystem::homonuclear("1H", &[0.0, 10.0, 20.0], [((0, 1), 50.0)]).unwrap();
        let t: CouplingTargets = [((0, 2), 1.0)].into();
        assert!(lp_schedule(sys.couplings(), &t, &assign_patterns(3).unwrap(), ScheduleOptions::default()).is_err());
    }
}
