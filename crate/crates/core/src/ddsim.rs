//! Dynamical-decoupling sequences, memory fidelity under pulse errors, and
//! toggling-frame phase accumulation for time-varying offsets.

use crate::compulse::{catalog, composite_su2, pulse_su2, CompositePulse, GridSpec, ErrorMap, error_map};
use crate::error::{Error, Result};
use crate::fid::cardinal_average_matrix;
use crate::linalg::identity;
use crate::operator::{OpKind, Operator};
use crate::su2::Su2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DdKind {
    Cpmg,
    Xy4,
    Xy8,
    Kdd20,
    Udd,
}

impl DdKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "cpmg" => Ok(DdKind::Cpmg),
            "xy4" => Ok(DdKind::Xy4),
            "xy8" => Ok(DdKind::Xy8),
            "kdd" | "kdd20" | "kdd4" => Ok(DdKind::Kdd20),
            "udd" => Ok(DdKind::Udd),
            _ => Err(Error::Unknown {
                kind: "decoupling sequence",
                name: s.into(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DdKind::Cpmg => "cpmg",
            DdKind::Xy4 => "xy4",
            DdKind::Xy8 => "xy8",
            DdKind::Kdd20 => "kdd20",
            DdKind::Udd => "udd",
        }
    }

    /// Pulses per phase cycle. UDD has no phase cycle; one pulse per cycle.
    pub fn cycle_len(self) -> usize {
        match self {
            DdKind::Cpmg => 2,
            DdKind::Xy4 => 4,
            DdKind::Xy8 => 8,
            DdKind::Kdd20 => 20,
            DdKind::Udd => 1,
        }
    }
}

/// Phase block used for KDD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KddVariant {
    /// (30, 0, 90, 0, 30) offset by XY-4 phases.
    #[default]
    Standard,
    /// The catalog Knill NOT phases (240, 210, 300, 210, 240) offset by XY-4 phases.
    NotConvention,
}

/// How the Knill phases enter KDD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KddMode {
    /// Knill phases as an inner phase cycle of single pulses: 20-pulse cycle.
    #[default]
    PhaseCycle,
    /// Each XY-4 pulse replaced by a full Knill composite: 4-pulse cycle.
    Composite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DdPulse {
    /// Fraction of the period, in (0, 1).
    pub time: f64,
    pub phase_deg: f64,
    /// `None` for a plain 180°; otherwise a composite rotated by `phase_deg`.
    pub composite: Option<CompositePulse>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DdSequence {
    pub kind: DdKind,
    pub period_s: f64,
    pub pulses: Vec<DdPulse>,
    pub cycle_len: usize,
}

impl DdSequence {
    pub fn new(kind: DdKind, period_s: f64, pulses: Vec<DdPulse>, cycle_len: usize) -> Result<Self> {
        if !(period_s > 0.0 && period_s.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period_s}")));
        }
        if cycle_len == 0 {
            return Err(Error::InvalidArgument("cycle length must be at least 1".into()));
        }
        let mut last = 0.0;
        for p in &pulses {
            if !(p.time > last && p.time < 1.0) || !p.phase_deg.is_finite() {
                return Err(Error::InvalidArgument(
                    "pulse times must be strictly increasing inside (0, 1)".into(),
                ));
            }
            last = p.time;
        }
        Ok(Self {
            kind,
            period_s,
            pulses,
            cycle_len,
        })
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Absolute pulse times in seconds.
    pub fn times_s(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.time * self.period_s).collect()
    }

    pub fn phases_deg(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.phase_deg).collect()
    }

    /// Same timing with every pulse replaced by `pulse` rotated to its phase.
    pub fn with_composite(&self, pulse: &CompositePulse) -> Self {
        let mut out = self.clone();
        for p in &mut out.pulses {
            p.composite = Some(pulse.clone());
        }
        out
    }
}

/// t_j = T sin²(πj/(2n+2)), j = 1…n.
pub fn udd_times(n: usize, period: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("UDD needs at least one pulse".into()));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    let d = (2 * n + 2) as f64;
    Ok((1..=n)
        .map(|j| period * (std::f64::consts::PI * j as f64 / d).sin().powi(2))
        .collect())
}

fn even_times(n: usize) -> Vec<f64> {
    (0..n).map(|k| (2 * k + 1) as f64 / (2 * n) as f64).collect()
}

const XY4: [f64; 4] = [0.0, 90.0, 0.0, 90.0];
const XY8: [f64; 8] = [0.0, 90.0, 0.0, 90.0, 90.0, 0.0, 90.0, 0.0];

fn kdd_block(variant: KddVariant) -> [f64; 5] {
    match variant {
        KddVariant::Standard => [30.0, 0.0, 90.0, 0.0, 30.0],
        KddVariant::NotConvention => [240.0, 210.0, 300.0, 210.0, 240.0],
    }
}

/// Knill phases inside, XY-4 outside.
pub fn kdd_phases(variant: KddVariant) -> Vec<f64> {
    XY4.iter()
        .flat_map(|o| kdd_block(variant).map(|p| (p + o).rem_euclid(360.0)))
        .collect()
}

fn check_multiple(kind: DdKind, n: usize, m: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(m) {
        return Err(Error::InvalidArgument(format!(
            "{} needs a positive multiple of {m} pulses, got {n}",
            kind.name()
        )));
    }
    Ok(())
}

fn plain(time: f64, phase_deg: f64) -> DdPulse {
    DdPulse {
        time,
        phase_deg,
        composite: None,
    }
}

/// CPMG, XY-4, XY-8 and UDD, plus KDD in its default form.
pub fn build_sequence(kind: DdKind, n_pulses: usize, period: f64) -> Result<DdSequence> {
    match kind {
        DdKind::Kdd20 => build_kdd(n_pulses, period, KddVariant::Standard, KddMode::PhaseCycle),
        DdKind::Udd => {
            let times = udd_times(n_pulses, 1.0)?;
            DdSequence::new(kind, period, times.into_iter().map(|t| plain(t, 0.0)).collect(), 1)
        }
        DdKind::Cpmg | DdKind::Xy4 | DdKind::Xy8 => {
            let cycle: &[f64] = match kind {
                DdKind::Cpmg => &[0.0, 0.0],
                DdKind::Xy4 => &XY4,
                _ => &XY8,
            };
            check_multiple(kind, n_pulses, cycle.len())?;
            let pulses = even_times(n_pulses)
                .into_iter()
                .enumerate()
                .map(|(k, t)| plain(t, cycle[k % cycle.len()]))
                .collect();
            DdSequence::new(kind, period, pulses, cycle.len())
        }
    }
}

pub fn build_kdd(n_pulses: usize, period: f64, variant: KddVariant, mode: KddMode) -> Result<DdSequence> {
    match mode {
        KddMode::PhaseCycle => {
            check_multiple(DdKind::Kdd20, n_pulses, 20)?;
            let phases = kdd_phases(variant);
            let pulses = even_times(n_pulses)
                .into_iter()
                .enumerate()
                .map(|(k, t)| plain(t, phases[k % 20]))
                .collect();
            DdSequence::new(DdKind::Kdd20, period, pulses, 20)
        }
        KddMode::Composite => {
            check_multiple(DdKind::Kdd20, n_pulses, 4)?;
            let mut knill = catalog("knill")?;
            knill.phases_deg = kdd_block(variant).to_vec();
            let pulses = even_times(n_pulses)
                .into_iter()
                .enumerate()
                .map(|(k, t)| DdPulse {
                    time: t,
                    phase_deg: XY4[k % 4],
                    composite: Some(knill.clone()),
                })
                .collect();
            DdSequence::new(DdKind::Kdd20, period, pulses, 4)
        }
    }
}

fn pulse_element(p: &DdPulse, eps: f64, f: f64) -> Su2 {
    match &p.composite {
        None => pulse_su2(180.0, p.phase_deg, eps, f),
        Some(c) => composite_su2(&c.shifted(p.phase_deg), eps, f),
    }
}

/// Offset δ(u) = Σ c_k u^k on the normalized period u = t/T, in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetPoly {
    pub coeffs: Vec<f64>,
}

impl OffsetPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Self { coeffs }
    }

    /// Shifted Legendre polynomial P̃_k(u) = P_k(2u − 1).
    pub fn legendre(k: usize) -> Self {
        let coeffs = (0..=k)
            .map(|j| {
                let sign = if (k + j).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * binomial(k, j) * binomial(k + j, j)
            })
            .collect();
        Self { coeffs }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// ∫₀ᵘ δ(v) dv.
    pub fn antiderivative(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * u + c / (k + 1) as f64)
            * u
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Parses `legendre:K`, `monomial:K` or a comma list of coefficients.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse offset polynomial {s:?}"));
        if let Some((kind, k)) = s.split_once(':') {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            return match kind.trim() {
                "legendre" => Ok(Self::legendre(k)),
                "monomial" => Ok(Self::monomial(k)),
                _ => Err(bad()),
            };
        }
        let coeffs = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_times(pulse_times: &[f64], period: f64) -> Result<()> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    let mut last = 0.0;
    for &t in pulse_times {
        if !(t > last && t < period) {
            return Err(Error::InvalidArgument(
                "pulse times must be strictly increasing inside (0, T)".into(),
            ));
        }
        last = t;
    }
    Ok(())
}

/// Toggling-frame phases accumulated over each free interval, in radians.
pub fn interval_phases(offset: &OffsetPoly, pulse_times: &[f64], period: f64) -> Result<Vec<f64>> {
    check_times(pulse_times, period)?;
    let mut edges = Vec::with_capacity(pulse_times.len() + 2);
    edges.push(0.0);
    edges.extend(pulse_times.iter().map(|t| t / period));
    edges.push(1.0);
    Ok(edges
        .windows(2)
        .map(|w| period * (offset.antiderivative(w[1]) - offset.antiderivative(w[0])))
        .collect())
}

/// ∫₀ᵀ s(t) δ(t) dt with s flipping sign at every pulse; instantaneous pulses.
pub fn accumulated_phase(offset: &OffsetPoly, pulse_times: &[f64], period: f64) -> Result<f64> {
    let phases = interval_phases(offset, pulse_times, period)?;
    Ok(phases
        .iter()
        .enumerate()
        .map(|(k, p)| if k % 2 == 0 { *p } else { -p })
        .sum())
}

/// Running toggling-frame phase sampled on `n_samples` evenly spaced points.
pub fn phase_trajectory(
    offset: &OffsetPoly,
    pulse_times: &[f64],
    period: f64,
    n_samples: usize,
) -> Result<Vec<(f64, f64)>> {
    check_times(pulse_times, period)?;
    let edges: Vec<f64> = pulse_times.iter().map(|t| t / period).collect();
    let value = |u: f64| {
        let mut acc = 0.0;
        let mut start = 0.0;
        let mut sign = 1.0;
        for &e in edges.iter().take_while(|&&e| e < u) {
            acc += sign * (offset.antiderivative(e) - offset.antiderivative(start));
            start = e;
            sign = -sign;
        }
        period * (acc + sign * (offset.antiderivative(u) - offset.antiderivative(start)))
    };
    let n = n_samples.max(2);
    Ok((0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            (u * period, value(u))
        })
        .collect())
}

/// Dephasing during free evolution for the combined mode: each cycle sees
/// the same offset profile over its own period.
#[derive(Clone, Debug, PartialEq)]
pub struct Dephasing {
    pub offset: OffsetPoly,
}

/// Whole-sequence single-spin propagator for `n_cycles` repetitions.
/// Free evolution is ideal unless `dephasing` is supplied.
pub fn sequence_su2(seq: &DdSequence, n_cycles: usize, eps: f64, f: f64, dephasing: Option<&Dephasing>) -> Result<Su2> {
    let free = match dephasing {
        Some(d) => interval_phases(&d.offset, &seq.times_s(), seq.period_s)?
            .into_iter()
            .map(Su2::rz)
            .collect(),
        None => Vec::new(),
    };
    let mut one = free.first().copied().unwrap_or(Su2::IDENTITY);
    for (k, p) in seq.pulses.iter().enumerate() {
        one = pulse_element(p, eps, f) * one;
        if let Some(z) = free.get(k + 1) {
            one = *z * one;
        }
    }
    Ok((0..n_cycles).fold(Su2::IDENTITY, |acc, _| one * acc))
}

pub fn sequence_propagator(seq: &DdSequence, n_cycles: usize, eps: f64, f: f64) -> Result<Operator> {
    Ok(Operator::from_parts(
        sequence_su2(seq, n_cycles, eps, f, None)?.to_matrix(),
        OpKind::Unitary,
    ))
}

/// Number of whole sequence repetitions needed for `echoes` pulses in total.
pub fn cycles_for_echoes(seq: &DdSequence, echoes: usize) -> Result<usize> {
    if seq.is_empty() || !echoes.is_multiple_of(seq.len()) {
        return Err(Error::InvalidArgument(format!(
            "{echoes} echoes is not a whole number of {}-pulse sequences",
            seq.len()
        )));
    }
    Ok(echoes / seq.len())
}

fn complete_cycle_prefix(seq: &DdSequence) -> DdSequence {
    let keep = seq.len() - seq.len() % seq.cycle_len;
    DdSequence {
        pulses: seq.pulses[..keep].to_vec(),
        ..seq.clone()
    }
}

/// Cardinal-averaged state fidelity against the identity after `n_cycles`
/// repetitions of the sequence, truncated to its last complete phase cycle.
pub fn memory_fidelity(seq: &DdSequence, n_cycles: usize, eps: f64, f: f64) -> f64 {
    memory_fidelity_with(seq, n_cycles, eps, f, None)
}

pub fn memory_fidelity_with(
    seq: &DdSequence,
    n_cycles: usize,
    eps: f64,
    f: f64,
    dephasing: Option<&Dephasing>,
) -> f64 {
    let trimmed = complete_cycle_prefix(seq);
    match sequence_su2(&trimmed, n_cycles, eps, f, dephasing) {
        Ok(u) => cardinal_average_matrix(&identity(2), &u.to_matrix()),
        Err(_) => f64::NAN,
    }
}

/// Memory infidelity over an eps × f grid.
pub fn memory_error_map(seq: &DdSequence, n_cycles: usize, grid: &GridSpec) -> Result<ErrorMap> {
    error_map(|e, f| (1.0 - memory_fidelity(seq, n_cycles, e, f)).max(0.0), grid)
}
