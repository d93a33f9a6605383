//! Pseudo-pure state preparation: crusher gradients, spatial-averaging
//! networks, temporal averaging by population permutation, and the
//! eigenvalue-pattern check for pseudo-purity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ZERO};
use crate::operator::Operator;
use crate::spinsys::{coherence_orders, crush_matrix, iz_diagonal, spin_op_matrix, Axis, CoherenceOrderTable, SpinSystem};

/// Largest surviving zero-quantum element tolerated before a crush.
pub const ZQ_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Trace one.
    Density,
    /// Traceless deviation from the identity.
    Deviation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: CMatrix,
    norm: Normalization,
}

impl DensityState {
    pub fn new(matrix: CMatrix, norm: Normalization) -> Result<Self> {
        let op = Operator::hermitian(matrix)?;
        let tr = linalg::trace(op.matrix()).re;
        match norm {
            Normalization::Density => {
                if (tr - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
                }
                let min = linalg::eigh(op.matrix()).values[0];
                if min < -1e-10 {
                    return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
                }
            }
            Normalization::Deviation => {
                if tr.abs() > 1e-12 {
                    return Err(Error::InvalidDensity(format!("deviation trace {tr} is not 0")));
                }
            }
        }
        Ok(Self {
            matrix: op.into_matrix(),
            norm,
        })
    }

    pub(crate) fn from_parts(matrix: CMatrix, norm: Normalization) -> Self {
        Self { matrix, norm }
    }

    /// Σ_k p_k I_z^k with unit polarizations unless given.
    pub fn thermal_deviation(system: &SpinSystem, polarizations: Option<&[f64]>) -> Result<Self> {
        let q = system.len();
        if let Some(p) = polarizations {
            if p.len() != q {
                return Err(Error::DimensionMismatch(p.len(), q));
            }
        }
        let mut d = vec![0.0; system.dim()];
        for k in 0..q {
            let w = polarizations.map_or(1.0, |p| p[k]);
            for (x, z) in d.iter_mut().zip(iz_diagonal(q, k)) {
                *x += w * z;
            }
        }
        Ok(Self::from_parts(linalg::diag_matrix(&d), Normalization::Deviation))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// E/N + scale·Δ for a deviation state.
    pub fn to_density(&self, scale: f64) -> Result<Self> {
        match self.norm {
            Normalization::Density => Ok(self.clone()),
            Normalization::Deviation => {
                let n = self.dim();
                let m = linalg::identity(n).scale(1.0 / n as f64) + self.matrix.scale(scale);
                Self::new(m, Normalization::Density)
            }
        }
    }

    /// Coefficient of a product operator: tr(A†ρ)/tr(A†A).
    pub fn coefficient(&self, op: &CMatrix) -> f64 {
        (linalg::inner(op, &self.matrix) / linalg::inner(op, op)).re
    }

    pub fn evolve(&self, u: &CMatrix) -> Self {
        Self::from_parts(u * &self.matrix * u.adjoint(), self.norm)
    }
}

/// Removes every element that a gradient dephases.
pub fn crush(rho: &DensityState, orders: &CoherenceOrderTable) -> Result<DensityState> {
    if orders.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(orders.dim(), rho.dim()));
    }
    Ok(DensityState::from_parts(crush_matrix(&rho.matrix, orders), rho.norm))
}

/// Largest off-diagonal element that a crush would leave in place.
pub fn zero_quantum_amplitude(rho: &DensityState, orders: &CoherenceOrderTable) -> f64 {
    let n = rho.dim();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for cc in 0..n {
            if r != cc && orders.survives_crush(r, cc) {
                worst = worst.max(rho.matrix[(r, cc)].norm());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub enum PpsStep {
    /// exp(−iθ Σ_k (cosφ I_x^k + sinφ I_y^k)) on the listed spins.
    Pulse { spins: Vec<usize>, angle: f64, phase: f64 },
    /// Ideal isolated coupling exp(−iθ·2I_z^i I_z^j).
    Couple { i: usize, j: usize, angle: f64 },
    /// exp(−iθ I_z^k).
    ZRotation { spin: usize, angle: f64 },
    Crush,
}

impl PpsStep {
    pub fn pulse(spins: &[usize], angle_deg: f64, phase_deg: f64) -> Self {
        PpsStep::Pulse {
            spins: spins.to_vec(),
            angle: angle_deg.to_radians(),
            phase: phase_deg.to_radians(),
        }
    }

    /// Evolution for 1/2J under a single coupling.
    pub fn couple(i: usize, j: usize) -> Self {
        PpsStep::Couple { i, j, angle: PI / 2.0 }
    }

    pub fn label(&self) -> String {
        match self {
            PpsStep::Pulse { spins, angle, phase } => {
                let list: Vec<String> = spins.iter().map(|k| (k + 1).to_string()).collect();
                format!("{:.2}deg phase {:.1}deg on {}", angle.to_degrees(), phase.to_degrees(), list.join("+"))
            }
            PpsStep::Couple { i, j, angle } => format!("couple {},{} ({:.4} rad)", i + 1, j + 1, angle),
            PpsStep::ZRotation { spin, angle } => format!("z {:.4} rad on {}", angle, spin + 1),
            PpsStep::Crush => "crush".into(),
        }
    }
}

fn step_unitary(q: usize, step: &PpsStep) -> Result<Option<CMatrix>> {
    let check = |k: usize| {
        if k >= q {
            Err(Error::SpinIndex { index: k, count: q })
        } else {
            Ok(())
        }
    };
    Ok(match step {
        PpsStep::Pulse { spins, angle, phase } => {
            let dim = 1usize << q;
            let mut h = CMatrix::zeros(dim, dim);
            for &k in spins {
                check(k)?;
                h += spin_op_matrix(q, k, Axis::X).scale(phase.cos()) + spin_op_matrix(q, k, Axis::Y).scale(phase.sin());
            }
            Some(linalg::expm_hermitian(&h, *angle))
        }
        PpsStep::Couple { i, j, angle } => {
            check(*i)?;
            check(*j)?;
            if i == j {
                return Err(Error::InvalidProgram("coupling a spin to itself".into()));
            }
            let (zi, zj) = (iz_diagonal(q, *i), iz_diagonal(q, *j));
            let d: Vec<_> = zi.iter().zip(&zj).map(|(a, b)| c(0.0, -angle * 2.0 * a * b).exp()).collect();
            Some(CMatrix::from_diagonal(&linalg::CVector::from_vec(d)))
        }
        PpsStep::ZRotation { spin, angle } => {
            check(*spin)?;
            let d: Vec<_> = iz_diagonal(q, *spin).iter().map(|z| c(0.0, -angle * z).exp()).collect();
            Some(CMatrix::from_diagonal(&linalg::CVector::from_vec(d)))
        }
        PpsStep::Crush => None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PpsRun {
    /// State after each step, labelled.
    pub stages: Vec<(String, DensityState)>,
    /// Surviving zero-quantum amplitude seen just before each crush.
    pub zq_before_crush: Vec<f64>,
}

impl PpsRun {
    pub fn output(&self) -> &DensityState {
        &self.stages.last().expect("runs hold the initial state").1
    }
}

/// Applies the steps in order. With `guard_zq`, a crush that would leave a
/// zero-quantum element above `ZQ_TOLERANCE` is an error.
pub fn run_sequence(system: &SpinSystem, initial: &DensityState, steps: &[PpsStep], guard_zq: bool) -> Result<PpsRun> {
    if initial.dim() != system.dim() {
        return Err(Error::DimensionMismatch(initial.dim(), system.dim()));
    }
    let orders = coherence_orders(system);
    let mut stages = vec![("initial".to_string(), initial.clone())];
    let mut zq = Vec::new();
    let mut rho = initial.clone();
    for step in steps {
        rho = match step_unitary(system.len(), step)? {
            Some(u) => rho.evolve(&u),
            None => {
                let amp = zero_quantum_amplitude(&rho, &orders);
                zq.push(amp);
                if guard_zq && amp > ZQ_TOLERANCE {
                    return Err(Error::Internal(format!(
                        "zero-quantum amplitude {amp:.3e} would survive crush {}",
                        zq.len()
                    )));
                }
                crush(&rho, &orders)?
            }
        };
        stages.push((step.label(), rho.clone()));
    }
    Ok(PpsRun {
        stages,
        zq_before_crush: zq,
    })
}

fn require_coupling(system: &SpinSystem, i: usize, j: usize) -> Result<()> {
    if system.coupling(i, j) == 0.0 {
        return Err(Error::InvalidSystem(format!(
            "spins {} and {} need a nonzero coupling",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}

pub fn two_spin_homonuclear_steps() -> Vec<PpsStep> {
    vec![
        PpsStep::pulse(&[1], 60.0, 0.0),
        PpsStep::Crush,
        PpsStep::pulse(&[0], 45.0, 0.0),
        PpsStep::couple(0, 1),
        PpsStep::pulse(&[0], 45.0, -90.0),
        PpsStep::Crush,
    ]
}

pub fn two_spin_heteronuclear_steps() -> Vec<PpsStep> {
    vec![
        PpsStep::pulse(&[0, 1], 45.0, 0.0),
        PpsStep::couple(0, 1),
        PpsStep::pulse(&[0, 1], 30.0, -90.0),
        PpsStep::Crush,
    ]
}

/// I_z + S_z → ½(I_z + S_z + 2I_zS_z) on a coupled homonuclear pair.
pub fn pps_two_spin_homonuclear(system: &SpinSystem) -> Result<PpsRun> {
    if system.len() != 2 || !system.is_homonuclear() {
        return Err(Error::InvalidSystem("needs two spins of one species".into()));
    }
    require_coupling(system, 0, 1)?;
    let rho = DensityState::thermal_deviation(system, None)?;
    run_sequence(system, &rho, &two_spin_homonuclear_steps(), true)
}

/// Equal-polarization I_z + S_z → √(3/8)(I_z + S_z + 2I_zS_z) on a heteronuclear pair.
pub fn pps_two_spin_heteronuclear(system: &SpinSystem) -> Result<PpsRun> {
    if system.len() != 2 || system.is_homonuclear() {
        return Err(Error::InvalidSystem("needs two spins of different species".into()));
    }
    require_coupling(system, 0, 1)?;
    let rho = DensityState::thermal_deviation(system, None)?;
    run_sequence(system, &rho, &two_spin_heteronuclear_steps(), false)
}

/// Pulse x on the target, isolated coupling to the control, pulse −y on the target.
fn controlled_block(target: usize, control: usize, angle_deg: f64) -> [PpsStep; 3] {
    [
        PpsStep::pulse(&[target], angle_deg, 0.0),
        PpsStep::couple(target.min(control), target.max(control)),
        PpsStep::pulse(&[target], angle_deg, -90.0),
    ]
}

/// Steps for a four-spin chain 1–2–3–4 (0-based indices in the steps).
pub fn crotonic_chain_steps() -> Vec<PpsStep> {
    let mut s = vec![
        PpsStep::Pulse { spins: vec![1], angle: 0.5f64.acos(), phase: 0.0 },
        PpsStep::Pulse { spins: vec![2], angle: 0.25f64.acos(), phase: 0.0 },
        PpsStep::Pulse { spins: vec![3], angle: 0.125f64.acos(), phase: 0.0 },
        PpsStep::Crush,
    ];
    s.extend(controlled_block(0, 1, 90.0));
    s.extend(controlled_block(1, 2, 90.0));
    s.extend(controlled_block(2, 3, 45.0));
    s.push(PpsStep::Crush);
    s.extend(controlled_block(1, 2, 45.0));
    s.push(PpsStep::Crush);
    s.extend(controlled_block(0, 1, 45.0));
    s.push(PpsStep::Crush);
    s
}

pub fn pps_crotonic_chain(system: &SpinSystem) -> Result<PpsRun> {
    if system.len() != 4 || !system.is_homonuclear() {
        return Err(Error::InvalidSystem("needs a four-spin homonuclear chain".into()));
    }
    for k in 0..3 {
        require_coupling(system, k, k + 1)?;
    }
    let rho = DensityState::thermal_deviation(system, None)?;
    run_sequence(system, &rho, &crotonic_chain_steps(), true)
}

/// Cyclic shifts of the excited-state populations, ground state fixed.
/// Returns the N−2 nontrivial permutations as index maps `perm[old] = new`.
pub fn excited_cyclic_permutations(dim: usize) -> Vec<Vec<usize>> {
    let m = dim.saturating_sub(1);
    (1..m)
        .map(|shift| {
            (0..dim)
                .map(|i| if i == 0 { 0 } else { 1 + (i - 1 + shift) % m })
                .collect()
        })
        .collect()
}

pub fn permute_populations(rho: &DensityState, perm: &[usize]) -> Result<DensityState> {
    let n = rho.dim();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument("not a permutation of the basis".into()));
    }
    let mut p = CMatrix::from_element(n, n, ZERO);
    for (old, &new) in perm.iter().enumerate() {
        p[(new, old)] = c(1.0, 0.0);
    }
    Ok(rho.evolve(&p))
}

pub fn temporal_average(states: &[DensityState]) -> Result<DensityState> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to average".into()))?;
    let mut acc = CMatrix::zeros(first.dim(), first.dim());
    for s in states {
        if s.dim() != first.dim() {
            return Err(Error::DimensionMismatch(s.dim(), first.dim()));
        }
        if s.norm != first.norm {
            return Err(Error::InvalidArgument("mixed normalizations".into()));
        }
        acc += &s.matrix;
    }
    Ok(DensityState::from_parts(acc.scale(1.0 / states.len() as f64), first.norm))
}

/// The input plus every cyclic permutation of its excited populations, averaged.
pub fn temporal_average_by_permutation(rho: &DensityState) -> Result<DensityState> {
    let mut states = vec![rho.clone()];
    for p in excited_cyclic_permutations(rho.dim()) {
        states.push(permute_populations(rho, &p)?);
    }
    temporal_average(&states)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoPurity {
    pub is_pps: bool,
    /// Weight of the pure component: λ_max = p + (1 − p)/N.
    pub purity: f64,
    /// Basis state carrying the raised eigenvalue.
    pub target_index: usize,
    /// All eigenvalues equal (maximally mixed).
    pub degenerate: bool,
    pub eigenvalues: Vec<f64>,
}

pub const PPS_EIGEN_TOL: f64 = 1e-10;

pub fn pseudo_purity(rho: &DensityState) -> Result<PseudoPurity> {
    if rho.norm != Normalization::Density {
        return Err(Error::InvalidDensity("pseudo-purity needs a trace-one state".into()));
    }
    let n = rho.dim();
    let eig = linalg::eigh(&rho.matrix);
    let vals = eig.values.clone();
    let lo = vals[0];
    let hi = vals[n - 1];
    let rest_equal = vals[..n - 1].iter().all(|v| (v - lo).abs() <= PPS_EIGEN_TOL);
    let degenerate = (hi - lo).abs() <= PPS_EIGEN_TOL;
    let is_pps = rest_equal && (degenerate || hi > lo + PPS_EIGEN_TOL);
    let inv_n = 1.0 / n as f64;
    let purity = if n > 1 { (hi - inv_n) / (1.0 - inv_n) } else { 1.0 };
    let top = eig.vectors.column(n - 1);
    let target_index = (0..n)
        .max_by(|&a, &b| top[a].norm().total_cmp(&top[b].norm()))
        .unwrap_or(0);
    Ok(PseudoPurity {
        is_pps,
        purity: if degenerate { 0.0 } else { purity },
        target_index,
        degenerate,
        eigenvalues: vals,
    })
}
