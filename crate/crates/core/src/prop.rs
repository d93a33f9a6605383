//! Piecewise-constant pulse programs, ensembles and propagators.
//!
//! Control amplitudes are in Hz and enter the Hamiltonian as 2π·α·F (rad/s).
//! Phases are radians here; the file layer converts to degrees.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::{OpKind, Operator};
use crate::spinsys::{self, PassiveMember, SpinSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlMode {
    Xy,
    AmpPhase,
    PhaseOnly,
}

impl ControlMode {
    pub fn name(self) -> &'static str {
        match self {
            ControlMode::Xy => "xy",
            ControlMode::AmpPhase => "amp_phase",
            ControlMode::PhaseOnly => "phase_only",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(ControlMode::Xy),
            "amp_phase" => Ok(ControlMode::AmpPhase),
            "phase_only" => Ok(ControlMode::PhaseOnly),
            _ => Err(Error::Unknown {
                kind: "control mode",
                name: s.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelControls {
    /// (αx, αy) in Hz per step.
    Xy(Vec<[f64; 2]>),
    /// (A ≥ 0 in Hz, φ in rad) per step.
    AmpPhase(Vec<[f64; 2]>),
    /// Fixed amplitude, one phase per step.
    PhaseOnly { amp_hz: f64, phases: Vec<f64> },
}

impl ChannelControls {
    pub fn len(&self) -> usize {
        match self {
            ChannelControls::Xy(v) | ChannelControls::AmpPhase(v) => v.len(),
            ChannelControls::PhaseOnly { phases, .. } => phases.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode(&self) -> ControlMode {
        match self {
            ChannelControls::Xy(_) => ControlMode::Xy,
            ChannelControls::AmpPhase(_) => ControlMode::AmpPhase,
            ChannelControls::PhaseOnly { .. } => ControlMode::PhaseOnly,
        }
    }

    /// (αx, αy) in Hz at step j.
    pub fn xy(&self, j: usize) -> (f64, f64) {
        match self {
            ChannelControls::Xy(v) => (v[j][0], v[j][1]),
            ChannelControls::AmpPhase(v) => (v[j][0] * v[j][1].cos(), v[j][0] * v[j][1].sin()),
            ChannelControls::PhaseOnly { amp_hz, phases } => {
                (amp_hz * phases[j].cos(), amp_hz * phases[j].sin())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidProgram(m.into()));
        match self {
            ChannelControls::Xy(v) => {
                if v.iter().flatten().any(|x| !x.is_finite()) {
                    return bad("non-finite xy amplitude");
                }
            }
            ChannelControls::AmpPhase(v) => {
                if v.iter().flatten().any(|x| !x.is_finite()) {
                    return bad("non-finite amplitude or phase");
                }
                if v.iter().any(|s| s[0] < 0.0) {
                    return bad("negative amplitude in amp_phase form");
                }
            }
            ChannelControls::PhaseOnly { amp_hz, phases } => {
                if !amp_hz.is_finite() || *amp_hz < 0.0 {
                    return bad("phase-only amplitude must be finite and non-negative");
                }
                if phases.iter().any(|x| !x.is_finite()) {
                    return bad("non-finite phase");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelProgram {
    pub species: String,
    pub controls: ChannelControls,
}

/// Piecewise-constant controls. Channels absent from the program are undriven.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProgram {
    tau_s: f64,
    n_steps: usize,
    channels: Vec<ChannelProgram>,
}

impl PulseProgram {
    pub fn new(tau_s: f64, n_steps: usize, channels: Vec<ChannelProgram>) -> Result<Self> {
        if !(tau_s.is_finite() && tau_s > 0.0) {
            return Err(Error::InvalidProgram(format!("step duration {tau_s} must be > 0")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidProgram("program needs at least one step".into()));
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.controls.len() != n_steps {
                return Err(Error::InvalidProgram(format!(
                    "channel {} has {} steps, expected {n_steps}",
                    ch.species,
                    ch.controls.len()
                )));
            }
            ch.controls.validate()?;
            if channels[..i].iter().any(|o| o.species == ch.species) {
                return Err(Error::InvalidProgram(format!(
                    "channel {} listed twice",
                    ch.species
                )));
            }
        }
        Ok(Self {
            tau_s,
            n_steps,
            channels,
        })
    }

    /// Free evolution for n steps.
    pub fn free(tau_s: f64, n_steps: usize) -> Result<Self> {
        Self::new(tau_s, n_steps, Vec::new())
    }

    pub fn tau(&self) -> f64 {
        self.tau_s
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn duration(&self) -> f64 {
        self.tau_s * self.n_steps as f64
    }

    pub fn channels(&self) -> &[ChannelProgram] {
        &self.channels
    }

    /// Checks that every channel exists in `system`.
    pub fn check_against(&self, system: &SpinSystem) -> Result<()> {
        for ch in &self.channels {
            system.channel(&ch.species)?;
        }
        Ok(())
    }
}

/// One system variant: RF scaling per channel plus optional passive-spin offset shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleMember {
    pub weight: f64,
    /// Scaling for channels without an explicit entry.
    pub rf_scale: f64,
    pub channel_scale: BTreeMap<String, f64>,
    /// Offset shift per spin in Hz.
    pub offset_shift_hz: Option<Vec<f64>>,
}

impl EnsembleMember {
    pub fn nominal() -> Self {
        Self {
            weight: 1.0,
            rf_scale: 1.0,
            channel_scale: BTreeMap::new(),
            offset_shift_hz: None,
        }
    }

    pub fn scale(&self, species: &str) -> f64 {
        self.channel_scale.get(species).copied().unwrap_or(self.rf_scale)
    }

    /// The system as seen by this member.
    pub fn apply(&self, system: &SpinSystem) -> Result<SpinSystem> {
        match &self.offset_shift_hz {
            Some(s) => system.with_offset_shifts(s),
            None => Ok(system.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    members: Vec<EnsembleMember>,
}

impl EnsembleSpec {
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("ensemble is empty".into()));
        }
        if members.iter().any(|m| !(m.weight.is_finite() && m.weight >= 0.0)) {
            return Err(Error::InvalidArgument("ensemble weights must be non-negative".into()));
        }
        let w: f64 = members.iter().map(|m| m.weight).sum();
        if (w - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "ensemble weights sum to {w}, expected 1"
            )));
        }
        Ok(Self { members })
    }

    pub fn nominal() -> Self {
        Self {
            members: vec![EnsembleMember::nominal()],
        }
    }

    /// Equal-weight RF scaling of every channel.
    pub fn b1(scales: &[f64]) -> Result<Self> {
        let n = scales.len() as f64;
        Self::new(
            scales
                .iter()
                .map(|&s| EnsembleMember {
                    weight: 1.0 / n,
                    rf_scale: s,
                    ..EnsembleMember::nominal()
                })
                .collect(),
        )
    }

    /// The {0.97, 1.00, 1.03} RF ensemble.
    pub fn default_b1() -> Self {
        Self::b1(&[0.97, 1.0, 1.03]).expect("static ensemble")
    }

    /// Independent scaling per channel; every combination with equal weight.
    pub fn b1_per_channel(per_channel: &[(&str, Vec<f64>)]) -> Result<Self> {
        let mut members = vec![EnsembleMember::nominal()];
        for (species, scales) in per_channel {
            if scales.is_empty() {
                return Err(Error::InvalidArgument(format!("no scalings for {species}")));
            }
            let mut next = Vec::new();
            for m in &members {
                for &s in scales {
                    let mut m2 = m.clone();
                    m2.weight /= scales.len() as f64;
                    m2.channel_scale.insert(species.to_string(), s);
                    next.push(m2);
                }
            }
            members = next;
        }
        Self::new(members)
    }

    pub fn from_passive(members: &[PassiveMember]) -> Result<Self> {
        Self::new(
            members
                .iter()
                .map(|p| EnsembleMember {
                    weight: p.weight,
                    offset_shift_hz: Some(p.offset_shift_hz.clone()),
                    ..EnsembleMember::nominal()
                })
                .collect(),
        )
    }

    /// Cartesian product; weights multiply, scalings multiply, shifts add.
    pub fn product(&self, other: &EnsembleSpec) -> Result<Self> {
        let mut out = Vec::new();
        for a in &self.members {
            for b in &other.members {
                let mut channel_scale = BTreeMap::new();
                for k in a.channel_scale.keys().chain(b.channel_scale.keys()) {
                    channel_scale.insert(k.clone(), a.scale(k) * b.scale(k));
                }
                let offset_shift_hz = match (&a.offset_shift_hz, &b.offset_shift_hz) {
                    (Some(x), Some(y)) => {
                        if x.len() != y.len() {
                            return Err(Error::DimensionMismatch(x.len(), y.len()));
                        }
                        Some(x.iter().zip(y).map(|(p, q)| p + q).collect())
                    }
                    (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                    (None, None) => None,
                };
                out.push(EnsembleMember {
                    weight: a.weight * b.weight,
                    rf_scale: a.rf_scale * b.rf_scale,
                    channel_scale,
                    offset_shift_hz,
                });
            }
        }
        Self::new(out)
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Control operators of one channel with the member's RF scaling folded in (rad/s per Hz).
#[derive(Clone, Debug)]
pub(crate) struct ChannelModel {
    pub gain: f64,
    pub fx: CMatrix,
    pub fy: CMatrix,
    pub fz: Vec<f64>,
}

/// Everything needed to build H_j for one member, aligned with the program's channels.
#[derive(Clone, Debug)]
pub(crate) struct StepModel {
    pub dim: usize,
    pub drift: Vec<f64>,
    pub channels: Vec<ChannelModel>,
}

impl StepModel {
    pub fn new(system: &SpinSystem, species: &[String], member: &EnsembleMember) -> Result<Self> {
        let sys = member.apply(system)?;
        let q = sys.len();
        let mut channels = Vec::with_capacity(species.len());
        for sp in species {
            let (fx, fy) = spinsys::total_xy_matrices(&sys, sp)?;
            let fz = spinsys::channel_fz_diagonal(q, &sys.channel(sp)?.spins);
            channels.push(ChannelModel {
                gain: 2.0 * PI * member.scale(sp),
                fx,
                fy,
                fz,
            });
        }
        Ok(Self {
            dim: sys.dim(),
            drift: spinsys::drift_diagonal(&sys),
            channels,
        })
    }

    pub fn for_program(system: &SpinSystem, program: &PulseProgram, member: &EnsembleMember) -> Result<Self> {
        let species: Vec<String> = program.channels().iter().map(|c| c.species.clone()).collect();
        Self::new(system, &species, member)
    }

    /// H = H0 + Σ_c gain_c (αx Fx + αy Fy); `xy[c]` in Hz.
    pub fn hamiltonian(&self, xy: &[(f64, f64)]) -> CMatrix {
        let mut h = linalg::diag_matrix(&self.drift);
        for (ch, &(ax, ay)) in self.channels.iter().zip(xy) {
            if ax != 0.0 {
                h += ch.fx.scale(ch.gain * ax);
            }
            if ay != 0.0 {
                h += ch.fy.scale(ch.gain * ay);
            }
        }
        h
    }

    pub fn step_xy(program: &PulseProgram, j: usize) -> Vec<(f64, f64)> {
        program.channels().iter().map(|c| c.controls.xy(j)).collect()
    }
}

/// exp(−iHt) by Hermitian eigendecomposition.
pub fn expm_step(h: &Operator, t: f64) -> Result<Operator> {
    if h.kind() != OpKind::Hermitian {
        let d = linalg::hermitian_defect(h.matrix());
        if d > crate::operator::HERMITIAN_TOL {
            return Err(Error::NotHermitian(d));
        }
    }
    Operator::unitary(linalg::expm_hermitian(h.matrix(), t))
}

/// H_j for one ensemble member, rad/s.
pub fn step_hamiltonian(
    system: &SpinSystem,
    program: &PulseProgram,
    j: usize,
    member: &EnsembleMember,
) -> Result<Operator> {
    if j >= program.n_steps() {
        return Err(Error::InvalidArgument(format!(
            "step {j} out of range for {} steps",
            program.n_steps()
        )));
    }
    let model = StepModel::for_program(system, program, member)?;
    Ok(Operator::from_parts(
        model.hamiltonian(&StepModel::step_xy(program, j)),
        OpKind::Hermitian,
    ))
}

pub(crate) fn step_propagators(model: &StepModel, program: &PulseProgram) -> Vec<CMatrix> {
    (0..program.n_steps())
        .map(|j| linalg::expm_hermitian(&model.hamiltonian(&StepModel::step_xy(program, j)), program.tau()))
        .collect()
}

/// V = V_n ⋯ V_1.
pub fn sequence_propagator(
    system: &SpinSystem,
    program: &PulseProgram,
    member: &EnsembleMember,
) -> Result<Operator> {
    let model = StepModel::for_program(system, program, member)?;
    let mut v = linalg::identity(model.dim);
    for vj in step_propagators(&model, program) {
        v = vj * v;
    }
    Operator::unitary(v)
}

/// Trotter-split phase-modulated step: only diagonal exponentials plus two
/// fixed dense factors W1 = e^{−iH0τ/2}·H⊗q and W2 = H⊗q·e^{−iH0τ/2}.
#[derive(Clone, Debug)]
pub struct Grawme {
    w1: CMatrix,
    w2: CMatrix,
    fz: Vec<f64>,
    tau: f64,
    gain: f64,
}

impl Grawme {
    pub fn new(system: &SpinSystem, tau: f64, rf_scale: f64) -> Result<Self> {
        if system.channels().len() != 1 {
            return Err(Error::Unsupported(
                "the Trotter-split step requires a single homonuclear channel".into(),
            ));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!("step duration {tau} must be > 0")));
        }
        let q = system.len();
        let n = system.dim();
        let h1 = CMatrix::from_row_slice(
            2,
            2,
            &[linalg::ONE, linalg::ONE, linalg::ONE, -linalg::ONE],
        )
        .unscale(2f64.sqrt());
        let mut hq = h1.clone();
        for _ in 1..q {
            hq = linalg::kron(&hq, &h1);
        }
        let half: Vec<Complex64> = spinsys::drift_diagonal(system)
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * tau / 2.0))
            .collect();
        let mut w1 = hq.clone();
        let mut w2 = hq;
        for r in 0..n {
            for cc in 0..n {
                w1[(r, cc)] *= half[r];
                w2[(r, cc)] *= half[cc];
            }
        }
        let all: Vec<usize> = (0..q).collect();
        Ok(Self {
            w1,
            w2,
            fz: spinsys::channel_fz_diagonal(q, &all),
            tau,
            gain: 2.0 * PI * rf_scale,
        })
    }

    /// Approximate step propagator for amplitude `a_hz` at phase `phi` (rad).
    pub fn step_matrix(&self, a_hz: f64, phi: f64) -> CMatrix {
        let n = self.fz.len();
        let mut w1e = self.w1.clone();
        for cc in 0..n {
            let e = Complex64::from_polar(1.0, -self.gain * a_hz * self.tau * self.fz[cc]);
            for r in 0..n {
                w1e[(r, cc)] *= e;
            }
        }
        let mut m = w1e * &self.w2;
        for r in 0..n {
            for cc in 0..n {
                m[(r, cc)] *= Complex64::from_polar(1.0, -phi * (self.fz[r] - self.fz[cc]));
            }
        }
        m
    }
}

pub fn grawme_step(system: &SpinSystem, a_hz: f64, phi: f64, tau: f64) -> Result<Operator> {
    let g = Grawme::new(system, tau, 1.0)?;
    Ok(Operator::from_parts(g.step_matrix(a_hz, phi), OpKind::Unitary))
}

/// Sequence propagator with every step in Trotter-split form.
pub fn grawme_sequence(
    system: &SpinSystem,
    program: &PulseProgram,
    member: &EnsembleMember,
) -> Result<Operator> {
    let sys = member.apply(system)?;
    if program.channels().len() != 1 {
        return Err(Error::Unsupported(
            "the Trotter-split form needs exactly one driven channel".into(),
        ));
    }
    let ch = &program.channels()[0];
    let g = Grawme::new(&sys, program.tau(), member.scale(&ch.species))?;
    let mut v = linalg::identity(sys.dim());
    for j in 0..program.n_steps() {
        let (ax, ay) = ch.controls.xy(j);
        let a = ax.hypot(ay);
        let phi = ay.atan2(ax);
        v = g.step_matrix(a, phi) * v;
    }
    Ok(Operator::from_parts(v, OpKind::Unitary))
}

/// U ρ U†.
pub fn evolve_state(rho: &Operator, u: &Operator) -> Result<Operator> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), u.dim()));
    }
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    Ok(match rho.kind() {
        OpKind::Hermitian => Operator::from_parts((&m + m.adjoint()).scale(0.5), OpKind::Hermitian),
        k => Operator::from_parts(m, k),
    })
}
