//! Gradient-ascent pulse engineering.
//!
//! The objective is the ensemble mean of Φ₄/d² = |tr(U†V)|²/d², so a perfect
//! pulse scores 1. Parameters are laid out step-major: for step j and
//! channel c, xy and amp/phase forms use two slots `(j·n_ch + c)·2 + {0,1}`,
//! phase-only uses one slot `j·n_ch + c`. Amplitudes are Hz, phases radians.

mod optimize;
mod sweep;

pub use optimize::{optimize, optimize_from, GrapeResult, StopReason};
pub use sweep::{forward_backward, Sweep};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::Operator;
use crate::prop::{ChannelControls, ChannelProgram, ControlMode, EnsembleSpec, PulseProgram, StepModel};
use crate::spinsys::SpinSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    /// First-order −iτF·V_j approximation.
    Approx,
    /// Eigenbasis divided differences.
    Exact,
    /// Commutator identity for phase-modulated fixed-amplitude steps.
    PhaseOnlyExact,
}

impl GradientMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "approx" => Ok(Self::Approx),
            "exact" => Ok(Self::Exact),
            "phase_only_exact" | "phase_only" => Ok(Self::PhaseOnlyExact),
            _ => Err(Error::Unknown {
                kind: "gradient mode",
                name: s.into(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    SteepestAscent,
    QuasiNewton,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTemplate {
    pub species: String,
    /// Fixed amplitude in phase-only mode, amplitude cap otherwise (Hz).
    pub amp_hz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlTemplate {
    pub mode: ControlMode,
    pub n_steps: usize,
    pub tau_s: f64,
    pub channels: Vec<ChannelTemplate>,
}

impl ControlTemplate {
    pub fn phase_only(species: &str, amp_hz: f64, n_steps: usize, tau_s: f64) -> Self {
        Self {
            mode: ControlMode::PhaseOnly,
            n_steps,
            tau_s,
            channels: vec![ChannelTemplate {
                species: species.into(),
                amp_hz,
            }],
        }
    }

    fn slots(&self) -> usize {
        match self.mode {
            ControlMode::PhaseOnly => 1,
            _ => 2,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_steps * self.channels.len() * self.slots()
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps == 0 || !(self.tau_s.is_finite() && self.tau_s > 0.0) {
            return Err(Error::InvalidArgument("n_steps·τ must be positive".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidArgument("no driven channels".into()));
        }
        for ch in &self.channels {
            if !(ch.amp_hz.is_finite() && ch.amp_hz > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "amplitude for {} must be positive",
                    ch.species
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrapeOptions {
    pub max_iterations: usize,
    pub goal_infidelity: f64,
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    /// Weight of the optional quadratic amplitude penalty (xy and amp/phase forms).
    pub penalty: Option<f64>,
    /// Largest parameter change of a trial step; defaults to 0.5 rad for
    /// phases and 5% of the cap for amplitudes.
    pub trust: Option<f64>,
}

impl Default for GrapeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            goal_infidelity: 1e-4,
            grad_tol: 1e-10,
            restarts: 5,
            seed: 0,
            optimizer: OptimizerKind::QuasiNewton,
            penalty: None,
            trust: None,
        }
    }
}

/// One (system, target) pair in a subsystem-averaged objective.
#[derive(Clone, Debug)]
pub struct SubsystemPart {
    pub system: SpinSystem,
    pub target: Operator,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct MemberModel {
    /// Ensemble weight × subsystem weight / d².
    pub scale: f64,
    pub target: CMatrix,
    pub model: StepModel,
    /// exp(−i(H0 + gain·A·Fx)τ), present for phase-only problems.
    pub vx: Option<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct GrapeProblem {
    pub template: ControlTemplate,
    pub gradient_mode: GradientMode,
    pub options: GrapeOptions,
    pub(crate) members: Vec<MemberModel>,
}

impl GrapeProblem {
    pub fn new(
        system: &SpinSystem,
        target: &Operator,
        template: ControlTemplate,
        ensemble: &EnsembleSpec,
        gradient_mode: GradientMode,
        options: GrapeOptions,
    ) -> Result<Self> {
        let targets = vec![target.clone(); ensemble.len()];
        Self::with_member_targets(system, &targets, template, ensemble, gradient_mode, options)
    }

    /// One target per ensemble member (passive-spin ensembles).
    pub fn with_member_targets(
        system: &SpinSystem,
        targets: &[Operator],
        template: ControlTemplate,
        ensemble: &EnsembleSpec,
        gradient_mode: GradientMode,
        options: GrapeOptions,
    ) -> Result<Self> {
        if targets.len() != ensemble.len() {
            return Err(Error::DimensionMismatch(targets.len(), ensemble.len()));
        }
        let parts: Vec<(SpinSystem, Operator, f64)> = ensemble
            .members()
            .iter()
            .zip(targets)
            .map(|(m, t)| (system.clone(), t.clone(), m.weight))
            .collect();
        let members: Vec<_> = ensemble.members().to_vec();
        Self::build(&parts, &members, true, template, gradient_mode, options)
    }

    /// Weighted mean over subsystems, each averaged over `ensemble`.
    pub fn from_subsystems(
        parts: &[SubsystemPart],
        template: ControlTemplate,
        ensemble: &EnsembleSpec,
        gradient_mode: GradientMode,
        options: GrapeOptions,
    ) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("no subsystems".into()));
        }
        let wsum: f64 = parts.iter().map(|p| p.weight).sum();
        if !(wsum > 0.0) || parts.iter().any(|p| !(p.weight >= 0.0)) {
            return Err(Error::InvalidArgument("subsystem weights must be non-negative with positive sum".into()));
        }
        let tuples: Vec<_> = parts
            .iter()
            .map(|p| (p.system.clone(), p.target.clone(), p.weight / wsum))
            .collect();
        Self::build(&tuples, ensemble.members(), false, template, gradient_mode, options)
    }

    fn build(
        parts: &[(SpinSystem, Operator, f64)],
        ensemble: &[crate::prop::EnsembleMember],
        paired: bool,
        template: ControlTemplate,
        gradient_mode: GradientMode,
        options: GrapeOptions,
    ) -> Result<Self> {
        template.validate()?;
        if !(options.goal_infidelity > 0.0 && options.goal_infidelity < 1.0) {
            return Err(Error::InvalidArgument("goal infidelity must lie in (0, 1)".into()));
        }
        if gradient_mode == GradientMode::PhaseOnlyExact {
            if template.mode != ControlMode::PhaseOnly {
                return Err(Error::Unsupported(
                    "phase-only gradient requires the phase-only parameterization".into(),
                ));
            }
            if template.channels.len() != 1 {
                return Err(Error::Unsupported(
                    "phase-only gradient is defined for a single driven channel".into(),
                ));
            }
        }
        let species: Vec<String> = template.channels.iter().map(|c| c.species.clone()).collect();
        let mut members = Vec::new();
        let mut push = |sys: &SpinSystem, target: &Operator, w: f64, m: &crate::prop::EnsembleMember| -> Result<()> {
            for sp in &species {
                sys.channel(sp).map_err(|_| {
                    Error::InvalidArgument(format!("channel {sp} missing from a (sub)system"))
                })?;
            }
            if target.dim() != sys.dim() {
                return Err(Error::DimensionMismatch(target.dim(), sys.dim()));
            }
            let model = StepModel::new(sys, &species, m)?;
            let d = sys.dim() as f64;
            let vx = if template.mode == ControlMode::PhaseOnly {
                let xy: Vec<(f64, f64)> = template.channels.iter().map(|c| (c.amp_hz, 0.0)).collect();
                Some(linalg::expm_hermitian(&model.hamiltonian(&xy), template.tau_s))
            } else {
                None
            };
            members.push(MemberModel {
                scale: w / (d * d),
                target: target.matrix().clone(),
                model,
                vx,
            });
            Ok(())
        };
        if paired {
            for ((sys, t, _), m) in parts.iter().zip(ensemble) {
                push(sys, t, m.weight, m)?;
            }
        } else {
            for (sys, t, w) in parts {
                for m in ensemble {
                    push(sys, t, w * m.weight, m)?;
                }
            }
        }
        Ok(Self {
            template,
            gradient_mode,
            options,
            members,
        })
    }

    pub fn n_params(&self) -> usize {
        self.template.n_params()
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    /// Per-step (αx, αy) in Hz for every channel.
    pub(crate) fn step_xy(&self, params: &[f64], j: usize) -> Vec<(f64, f64)> {
        let nch = self.template.channels.len();
        self.template
            .channels
            .iter()
            .enumerate()
            .map(|(cidx, ch)| match self.template.mode {
                ControlMode::Xy => {
                    let b = (j * nch + cidx) * 2;
                    (params[b], params[b + 1])
                }
                ControlMode::AmpPhase => {
                    let b = (j * nch + cidx) * 2;
                    (params[b] * params[b + 1].cos(), params[b] * params[b + 1].sin())
                }
                ControlMode::PhaseOnly => {
                    let p = params[j * nch + cidx];
                    (ch.amp_hz * p.cos(), ch.amp_hz * p.sin())
                }
            })
            .collect()
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch(params.len(), self.n_params()));
        }
        Ok(())
    }

    pub fn program(&self, params: &[f64]) -> Result<PulseProgram> {
        self.check_len(params)?;
        let t = &self.template;
        let nch = t.channels.len();
        let channels = t
            .channels
            .iter()
            .enumerate()
            .map(|(c, ch)| {
                let controls = match t.mode {
                    ControlMode::Xy => ChannelControls::Xy(
                        (0..t.n_steps)
                            .map(|j| {
                                let b = (j * nch + c) * 2;
                                [params[b], params[b + 1]]
                            })
                            .collect(),
                    ),
                    ControlMode::AmpPhase => ChannelControls::AmpPhase(
                        (0..t.n_steps)
                            .map(|j| {
                                let b = (j * nch + c) * 2;
                                [params[b], params[b + 1].rem_euclid(2.0 * PI)]
                            })
                            .collect(),
                    ),
                    ControlMode::PhaseOnly => ChannelControls::PhaseOnly {
                        amp_hz: ch.amp_hz,
                        phases: (0..t.n_steps)
                            .map(|j| params[j * nch + c].rem_euclid(2.0 * PI))
                            .collect(),
                    },
                };
                ChannelProgram {
                    species: ch.species.clone(),
                    controls,
                }
            })
            .collect();
        PulseProgram::new(t.tau_s, t.n_steps, channels)
    }

    /// Inverse of [`GrapeProblem::program`] for programs matching the template.
    pub fn params_from_program(&self, program: &PulseProgram) -> Result<Vec<f64>> {
        let t = &self.template;
        if program.n_steps() != t.n_steps || program.channels().len() != t.channels.len() {
            return Err(Error::InvalidProgram("program does not match the template".into()));
        }
        let nch = t.channels.len();
        let mut x = vec![0.0; self.n_params()];
        for (c, (ch, tc)) in program.channels().iter().zip(&t.channels).enumerate() {
            if ch.species != tc.species || ch.controls.mode() != t.mode {
                return Err(Error::InvalidProgram("program does not match the template".into()));
            }
            match &ch.controls {
                ChannelControls::Xy(v) | ChannelControls::AmpPhase(v) => {
                    for (j, s) in v.iter().enumerate() {
                        let b = (j * nch + c) * 2;
                        x[b] = s[0];
                        x[b + 1] = s[1];
                    }
                }
                ChannelControls::PhaseOnly { phases, .. } => {
                    for (j, p) in phases.iter().enumerate() {
                        x[j * nch + c] = *p;
                    }
                }
            }
        }
        Ok(x)
    }

    /// Random start: uniform phases, Gaussian amplitudes with σ = 10% of the cap.
    pub fn initial_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let t = &self.template;
        let nch = t.channels.len();
        let mut x = vec![0.0; self.n_params()];
        for j in 0..t.n_steps {
            for (c, ch) in t.channels.iter().enumerate() {
                let normal = Normal::new(0.0, 0.1 * ch.amp_hz).expect("positive sigma");
                match t.mode {
                    ControlMode::PhaseOnly => x[j * nch + c] = rng.random_range(0.0..2.0 * PI),
                    ControlMode::Xy => {
                        let b = (j * nch + c) * 2;
                        x[b] = normal.sample(rng);
                        x[b + 1] = normal.sample(rng);
                    }
                    ControlMode::AmpPhase => {
                        let b = (j * nch + c) * 2;
                        x[b] = normal.sample(rng).abs();
                        x[b + 1] = rng.random_range(0.0..2.0 * PI);
                    }
                }
            }
        }
        self.project(&mut x);
        x
    }

    /// Hard amplitude clipping.
    pub fn project(&self, x: &mut [f64]) {
        let t = &self.template;
        let nch = t.channels.len();
        for j in 0..t.n_steps {
            for (c, ch) in t.channels.iter().enumerate() {
                let b = (j * nch + c) * 2;
                match t.mode {
                    ControlMode::PhaseOnly => {}
                    ControlMode::Xy => {
                        let r = x[b].hypot(x[b + 1]);
                        if r > ch.amp_hz {
                            x[b] *= ch.amp_hz / r;
                            x[b + 1] *= ch.amp_hz / r;
                        }
                    }
                    ControlMode::AmpPhase => x[b] = x[b].clamp(0.0, ch.amp_hz),
                }
            }
        }
    }

    pub(crate) fn trust(&self) -> f64 {
        self.options.trust.unwrap_or(match self.template.mode {
            ControlMode::PhaseOnly => 0.5,
            _ => {
                0.05 * self
                    .template
                    .channels
                    .iter()
                    .map(|c| c.amp_hz)
                    .fold(0.0, f64::max)
            }
        })
    }

    fn penalty(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let Some(lam) = self.options.penalty else { return 0.0 };
        if self.template.mode == ControlMode::PhaseOnly {
            return 0.0;
        }
        let t = &self.template;
        let nch = t.channels.len();
        let norm = (t.n_steps * nch) as f64;
        let mut p = 0.0;
        let mut g = grad;
        for j in 0..t.n_steps {
            for (c, ch) in t.channels.iter().enumerate() {
                let b = (j * nch + c) * 2;
                let cap2 = ch.amp_hz * ch.amp_hz;
                let comps: &[usize] = if t.mode == ControlMode::Xy { &[0, 1] } else { &[0] };
                for &k in comps {
                    p += lam * x[b + k] * x[b + k] / (cap2 * norm);
                    if let Some(g) = g.as_deref_mut() {
                        g[b + k] -= 2.0 * lam * x[b + k] / (cap2 * norm);
                    }
                }
            }
        }
        p
    }

    /// Mean fidelity (without penalty).
    pub fn fidelity(&self, params: &[f64]) -> Result<f64> {
        self.check_len(params)?;
        let parts: Vec<Result<f64>> = self
            .members
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let phi = sweep::member_phi4(self, m, params);
                if !phi.is_finite() {
                    return Err(Error::NonFinite { member: i });
                }
                Ok(m.scale * phi)
            })
            .collect();
        let mut acc = 0.0;
        for p in parts {
            acc += p?;
        }
        Ok(acc)
    }

    /// Fidelity minus penalty: the quantity the optimizer maximizes.
    pub fn objective(&self, params: &[f64]) -> Result<f64> {
        Ok(self.fidelity(params)? - self.penalty(params, None))
    }

    /// (fidelity, gradient of the objective) using the problem's gradient mode.
    pub fn objective_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.gradient_with(params, self.gradient_mode)
    }

    /// Returns (objective, gradient) for an explicit gradient mode.
    pub fn gradient_with(&self, params: &[f64], mode: GradientMode) -> Result<(f64, Vec<f64>)> {
        self.check_len(params)?;
        if mode == GradientMode::PhaseOnlyExact
            && (self.template.mode != ControlMode::PhaseOnly || self.template.channels.len() != 1)
        {
            return Err(Error::Unsupported(
                "phase-only gradient needs a single phase-only channel".into(),
            ));
        }
        let parts: Vec<Result<(f64, Vec<f64>)>> = self
            .members
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let (phi, g) = sweep::member_gradient(self, m, params, mode);
                if !phi.is_finite() || g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { member: i });
                }
                Ok((phi, g))
            })
            .collect();
        let mut f = 0.0;
        let mut grad = vec![0.0; self.n_params()];
        for (p, m) in parts.into_iter().zip(&self.members) {
            let (phi, g) = p?;
            f += m.scale * phi;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += m.scale * b;
            }
        }
        let pen = self.penalty(params, Some(&mut grad));
        Ok((f - pen, grad))
    }
}

pub fn grad_approx(problem: &GrapeProblem, params: &[f64]) -> Result<Vec<f64>> {
    Ok(problem.gradient_with(params, GradientMode::Approx)?.1)
}

pub fn grad_exact(problem: &GrapeProblem, params: &[f64]) -> Result<Vec<f64>> {
    Ok(problem.gradient_with(params, GradientMode::Exact)?.1)
}

pub fn grad_phase_only(problem: &GrapeProblem, params: &[f64]) -> Result<Vec<f64>> {
    Ok(problem.gradient_with(params, GradientMode::PhaseOnlyExact)?.1)
}

/// Weighted mean of per-subsystem ensemble fidelities for a fixed program.
pub fn subsystem_objective(
    systems: &[SpinSystem],
    targets: &[Operator],
    weights: &[f64],
    program: &PulseProgram,
    ensemble: &EnsembleSpec,
) -> Result<f64> {
    if systems.len() != targets.len() || systems.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} systems, {} targets, {} weights",
            systems.len(),
            targets.len(),
            weights.len()
        )));
    }
    let wsum: f64 = weights.iter().sum();
    if !(wsum > 0.0) {
        return Err(Error::InvalidArgument("weights must have a positive sum".into()));
    }
    let mut acc = 0.0;
    for ((s, t), w) in systems.iter().zip(targets).zip(weights) {
        acc += w * crate::fid::ensemble_fidelity(s, program, t, ensemble)?;
    }
    Ok(acc / wsum)
}
