//! Composite 180° pulses and their response to pulse-strength and offset errors.
//!
//! Error model, in units of the nominal nutation rate ω₁ = 1: a sub-pulse of
//! nominal flip θ and phase φ runs for time θ under
//! H = (1 + eps)(cos φ Ix + sin φ Iy) + f Iz.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{OpKind, Operator};
use crate::su2::Su2;

/// Gate a catalog pulse is meant to implement, up to global phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompositeTarget {
    /// 180° about x, i.e. the NOT gate.
    NotGate,
}

impl CompositeTarget {
    pub fn su2(self) -> Su2 {
        match self {
            CompositeTarget::NotGate => Su2::rotation(std::f64::consts::PI, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositePulse {
    pub name: String,
    pub flips_deg: Vec<f64>,
    /// Normalized to [0, 360).
    pub phases_deg: Vec<f64>,
    pub target: CompositeTarget,
}

impl CompositePulse {
    pub fn new(name: &str, flips_deg: Vec<f64>, phases_deg: Vec<f64>, target: CompositeTarget) -> Result<Self> {
        if flips_deg.len() != phases_deg.len() || flips_deg.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "composite pulse {name}: {} flips, {} phases",
                flips_deg.len(),
                phases_deg.len()
            )));
        }
        Ok(Self {
            name: name.to_string(),
            flips_deg,
            phases_deg: phases_deg.into_iter().map(|p| p.rem_euclid(360.0)).collect(),
            target,
        })
    }

    /// Same flips with every phase shifted.
    pub fn shifted(&self, offset_deg: f64) -> Self {
        Self {
            name: self.name.clone(),
            flips_deg: self.flips_deg.clone(),
            phases_deg: self.phases_deg.iter().map(|p| (p + offset_deg).rem_euclid(360.0)).collect(),
            target: self.target,
        }
    }

    pub fn len(&self) -> usize {
        self.flips_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips_deg.is_empty()
    }
}

pub const CATALOG: [&str; 5] = ["plain", "tycko_b1", "tycko_offres", "knill", "nine"];

/// The nine-pulse angles (α, β) in degrees.
pub fn nine_pulse_angles() -> (f64, f64) {
    let alpha = -((4.0 - 10f64.sqrt()) / 4.0).acos();
    let beta = 2.0 * alpha + (-(1.0 + 2.0 * alpha.cos()) / 2.0).acos();
    (alpha.to_degrees(), beta.to_degrees())
}

pub fn catalog(name: &str) -> Result<CompositePulse> {
    let t = CompositeTarget::NotGate;
    let all180 = |n: usize| vec![180.0; n];
    match name {
        "plain" => CompositePulse::new(name, all180(1), vec![0.0], t),
        "tycko_b1" => CompositePulse::new(name, all180(3), vec![120.0, 240.0, 120.0], t),
        "tycko_offres" => CompositePulse::new(name, all180(3), vec![60.0, 120.0, 60.0], t),
        "knill" => CompositePulse::new(name, all180(5), vec![240.0, 210.0, 300.0, 210.0, 240.0], t),
        "nine" => {
            let (a, b) = nine_pulse_angles();
            CompositePulse::new(
                name,
                all180(9),
                vec![a, b, b, b - 180.0, 2.0 * b - 2.0 * a, b - 180.0, b, b, a],
                t,
            )
        }
        _ => Err(Error::Unknown {
            kind: "composite pulse",
            name: name.into(),
        }),
    }
}

pub(crate) fn pulse_su2(flip_deg: f64, phase_deg: f64, eps: f64, f: f64) -> Su2 {
    let (s, co) = phase_deg.to_radians().sin_cos();
    Su2::evolve([(1.0 + eps) * co, (1.0 + eps) * s, f], flip_deg.to_radians())
}

pub fn pulse_propagator(flip_deg: f64, phase_deg: f64, eps: f64, f: f64) -> Operator {
    Operator::from_parts(pulse_su2(flip_deg, phase_deg, eps, f).to_matrix(), OpKind::Unitary)
}

/// First sub-pulse applied first.
pub(crate) fn composite_su2(pulse: &CompositePulse, eps: f64, f: f64) -> Su2 {
    pulse
        .flips_deg
        .iter()
        .zip(&pulse.phases_deg)
        .fold(Su2::IDENTITY, |acc, (&fl, &ph)| pulse_su2(fl, ph, eps, f) * acc)
}

pub fn composite_propagator(pulse: &CompositePulse, eps: f64, f: f64) -> Operator {
    Operator::from_parts(composite_su2(pulse, eps, f).to_matrix(), OpKind::Unitary)
}

/// Gate infidelity of a composite pulse against its stated target.
pub fn composite_infidelity(pulse: &CompositePulse, eps: f64, f: f64) -> f64 {
    (1.0 - pulse.target.su2().fidelity(composite_su2(pulse, eps, f))).max(0.0)
}

/// 180_{φ2}·180_{φ1}, a z-rotation by 2(φ2 − φ1) up to global phase.
pub fn z_rotation_pair(phi1_deg: f64, phi2_deg: f64) -> Operator {
    let u = pulse_su2(180.0, phi2_deg, 0.0, 0.0) * pulse_su2(180.0, phi1_deg, 0.0, 0.0);
    Operator::from_parts(u.to_matrix(), OpKind::Unitary)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub eps_min: f64,
    pub eps_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Points per axis.
    pub resolution: usize,
}

impl GridSpec {
    /// ±range on both axes.
    pub fn symmetric(range: f64, resolution: usize) -> Self {
        Self {
            eps_min: -range,
            eps_max: range,
            f_min: -range,
            f_max: range,
            resolution,
        }
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

/// Infidelities on an eps × f grid, row-major with eps varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMap {
    pub eps: Vec<f64>,
    pub f: Vec<f64>,
    pub infidelity: Vec<f64>,
}

impl ErrorMap {
    pub fn at(&self, i_eps: usize, i_f: usize) -> f64 {
        self.infidelity[i_eps * self.f.len() + i_f]
    }

    /// `eps,f,infidelity` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,f,infidelity\n");
        for (i, e) in self.eps.iter().enumerate() {
            for (j, f) in self.f.iter().enumerate() {
                s.push_str(&format!("{e:.6},{f:.6},{:.12e}\n", self.at(i, j)));
            }
        }
        s
    }
}

pub fn error_map<F>(evaluator: F, grid: &GridSpec) -> Result<ErrorMap>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if grid.resolution == 0 {
        return Err(Error::InvalidArgument("grid resolution must be at least 1".into()));
    }
    let bounds = [grid.eps_min, grid.eps_max, grid.f_min, grid.f_max];
    if bounds.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidArgument("grid bounds must be finite".into()));
    }
    let eps = GridSpec::axis(grid.eps_min, grid.eps_max, grid.resolution);
    let f = GridSpec::axis(grid.f_min, grid.f_max, grid.resolution);
    let n = grid.resolution;
    let infidelity = (0..n * n)
        .into_par_iter()
        .map(|k| evaluator(eps[k / n], f[k % n]))
        .collect();
    Ok(ErrorMap { eps, f, infidelity })
}
