use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use spinforge::compulse::{self, GridSpec};
use spinforge::ddsim::{self, DdKind, OffsetPoly};
use spinforge::fid::{self, UjMethod};
use spinforge::grape::{self, ChannelTemplate, ControlTemplate, GradientMode, GrapeOptions, GrapeProblem};
use spinforge::io;
use spinforge::pps::{self, DensityState};
use spinforge::prop::{ControlMode, EnsembleSpec};
use spinforge::refocus::{self, ScheduleOptions};
use spinforge::spinsys::{spin_op_matrix, Axis};
use spinforge::{gates, Operator, SpinSystem};

use crate::Run;

/// 12 significant figures.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn load_system(path: &Path) -> Result<SpinSystem> {
    io::load_spin_system(path).with_context(|| format!("loading spin system {}", path.display()))
}

/// `range:points`, e.g. `0.1:41` for ±0.1 on both axes with 41 points each.
fn parse_grid(s: &str) -> Result<GridSpec> {
    let (r, n) = s.split_once(':').ok_or_else(|| anyhow!("grid `{s}` is not range:points"))?;
    let range: f64 = r.parse().with_context(|| format!("grid range `{r}`"))?;
    let n: usize = n.parse().with_context(|| format!("grid points `{n}`"))?;
    if !(range.is_finite() && range >= 0.0) || n == 0 {
        bail!("grid `{s}` needs a non-negative range and at least one point");
    }
    Ok(GridSpec::symmetric(range, n))
}

fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some(d) = s.strip_suffix("deg") {
        d.trim().parse::<f64>()?.to_radians()
    } else {
        s.strip_suffix("rad").unwrap_or(s).trim().parse::<f64>()?
    };
    Ok(v)
}

#[derive(Args, Debug)]
pub struct GrapeArgs {
    #[arg(long)]
    system: PathBuf,
    /// Named gate (x90(1), hadamard, cnot(1,2), ...) or a matrix file.
    #[arg(long)]
    target: String,
    #[arg(long, default_value = "phase_only")]
    mode: String,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Step duration in seconds.
    #[arg(long, default_value_t = 1e-5)]
    tau: f64,
    /// Fixed amplitude (phase_only) or amplitude cap (Hz).
    #[arg(long, default_value_t = 25_000.0)]
    amp: f64,
    /// Driven species; defaults to the first species in the file.
    #[arg(long)]
    channel: Option<String>,
    /// `nominal` or `b1:s1,s2,...`.
    #[arg(long, default_value = "nominal")]
    ensemble: String,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 1e-3)]
    goal: f64,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
}

fn parse_ensemble(s: &str) -> Result<EnsembleSpec> {
    if s == "nominal" {
        return Ok(EnsembleSpec::nominal());
    }
    let list = s.strip_prefix("b1:").ok_or_else(|| anyhow!("ensemble `{s}` is neither nominal nor b1:..."))?;
    let scales = list
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("b1 scale `{t}`")))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleSpec::b1(&scales)?)
}

fn load_target(spec: &str, q: usize) -> Result<Operator> {
    if Path::new(spec).is_file() {
        return Ok(Operator::unitary(io::read_matrix(spec)?)?);
    }
    Ok(gates::named_gate(spec, q)?)
}

pub fn grape(run: &Run, a: &GrapeArgs) -> Result<()> {
    let system = load_system(&a.system)?;
    let target = load_target(&a.target, system.len())?;
    let mode = ControlMode::parse(&a.mode)?;
    let species = match &a.channel {
        Some(c) => c.clone(),
        None => system.channels()[0].species.clone(),
    };
    system.channel(&species)?;
    let template = ControlTemplate {
        mode,
        n_steps: a.steps,
        tau_s: a.tau,
        channels: vec![ChannelTemplate { species, amp_hz: a.amp }],
    };
    let gradient = if mode == ControlMode::PhaseOnly { GradientMode::PhaseOnlyExact } else { GradientMode::Exact };
    let ensemble = parse_ensemble(&a.ensemble)?;
    let options = GrapeOptions {
        max_iterations: a.iterations,
        goal_infidelity: a.goal,
        restarts: a.restarts,
        seed: run.seed,
        ..GrapeOptions::default()
    };
    let problem = GrapeProblem::new(&system, &target, template, &ensemble, gradient, options)?;
    let t0 = Instant::now();
    let r = grape::optimize(&problem)?;
    run.report(format!(
        "fidelity {} after {} iterations ({} attempts, {:?}, {:.2} s)",
        sig12(r.fidelity),
        r.iterations,
        r.attempts,
        r.stop,
        t0.elapsed().as_secs_f64()
    ));
    run.emit(&io::write_pulse(&r.program))
}

#[derive(Args, Debug)]
pub struct CompulseArgs {
    /// One of plain, tycko_b1, tycko_offres, knill, nine.
    #[arg(long)]
    pulse: String,
    #[arg(long, default_value = "0.1:41")]
    grid: String,
}

pub fn compulse(run: &Run, a: &CompulseArgs) -> Result<()> {
    let pulse = compulse::catalog(&a.pulse)?;
    let grid = parse_grid(&a.grid)?;
    let map = compulse::error_map(|e, f| compulse::composite_infidelity(&pulse, e, f), &grid)?;
    run.report(format!(
        "{}: {} sub-pulses, infidelity at (0,0) {}, grid max {}",
        pulse.name,
        pulse.len(),
        sig12(compulse::composite_infidelity(&pulse, 0.0, 0.0)),
        sig12(map.infidelity.iter().cloned().fold(0.0, f64::max))
    ));
    run.emit(&format!("{}\n{}", io::csv_header(run.seed), map.to_csv()))
}

#[derive(Args, Debug)]
pub struct DdArgs {
    /// cpmg, xy4, xy8, kdd20 or udd.
    #[arg(long, default_value = "cpmg")]
    sequence: String,
    /// Pulses per sequence; defaults to one phase cycle (4 for udd).
    #[arg(long)]
    pulses: Option<usize>,
    /// Total number of pulses applied.
    #[arg(long, default_value_t = 180)]
    echoes: usize,
    #[arg(long, default_value = "0.1:41")]
    grid: String,
    /// Toggling-frame phase test instead of an error map, e.g. `udd:4` or `cpmg:4`.
    #[arg(long)]
    phase_test: Option<String>,
    /// Offset profile for the phase test: `legendre:K`, `monomial:K` or coefficients.
    #[arg(long, default_value = "legendre:2")]
    offset: String,
}

pub fn dd(run: &Run, a: &DdArgs) -> Result<()> {
    if let Some(test) = &a.phase_test {
        return phase_test(run, test, &a.offset);
    }
    let kind = DdKind::parse(&a.sequence)?;
    let n = a.pulses.unwrap_or(if kind == DdKind::Udd { 4 } else { kind.cycle_len() });
    let seq = ddsim::build_sequence(kind, n, 1.0)?;
    let cycles = ddsim::cycles_for_echoes(&seq, a.echoes)?;
    let grid = parse_grid(&a.grid)?;
    let map = ddsim::memory_error_map(&seq, cycles, &grid)?;
    run.report(format!(
        "{}: {} pulses x {} repetitions, infidelity at (0,0) {}",
        kind.name(),
        seq.len(),
        cycles,
        sig12((1.0 - ddsim::memory_fidelity(&seq, cycles, 0.0, 0.0)).max(0.0))
    ));
    run.emit(&format!("{}\n{}", io::csv_header(run.seed), map.to_csv()))
}

fn phase_test(run: &Run, test: &str, offset: &str) -> Result<()> {
    let (kind, n) = test.split_once(':').ok_or_else(|| anyhow!("phase test `{test}` is not kind:n"))?;
    let n: usize = n.parse().with_context(|| format!("pulse count `{n}`"))?;
    let kind = match kind {
        "periodic" => DdKind::Cpmg,
        k => DdKind::parse(k)?,
    };
    let seq = ddsim::build_sequence(kind, n, 1.0)?;
    let poly = OffsetPoly::parse(offset)?;
    let times = seq.times_s();
    let phase = ddsim::accumulated_phase(&poly, &times, 1.0)?;
    let scale = ddsim::accumulated_phase(&OffsetPoly::monomial(0), &[], 1.0)?;
    let mut out = String::new();
    writeln!(out, "sequence {}:{n}", kind.name())?;
    writeln!(out, "times {}", times.iter().map(|t| sig12(*t)).collect::<Vec<_>>().join(" "))?;
    writeln!(out, "offset {offset}")?;
    writeln!(out, "accumulated_phase {}", sig12(phase))?;
    writeln!(out, "constant_scale {}", sig12(scale))?;
    writeln!(out, "relative {}", sig12(phase.abs() / scale.abs()))?;
    run.emit(&out)
}

#[derive(Args, Debug)]
pub struct RefocusArgs {
    #[arg(long)]
    system: PathBuf,
    /// Coupling evolutions, e.g. `1,2:90deg;3,4:90deg`; unlisted pairs are refocused.
    #[arg(long, default_value = "")]
    targets: String,
    /// z rotations, e.g. `1:90deg;3:-45deg`.
    #[arg(long)]
    z: Option<String>,
    /// Replay the schedule reversed instead of constraining offsets.
    #[arg(long)]
    symmetrize: bool,
}

fn parse_z(s: &str, q: usize) -> Result<Vec<f64>> {
    let mut z = vec![0.0; q];
    for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, ang) = item.split_once(':').ok_or_else(|| anyhow!("z rotation `{item}` is not k:angle"))?;
        let k: usize = k.trim().parse()?;
        if k == 0 || k > q {
            bail!("z rotation on spin {k} of a {q}-spin system");
        }
        z[k - 1] = parse_angle(ang)?;
    }
    Ok(z)
}

pub fn refocus(run: &Run, a: &RefocusArgs) -> Result<()> {
    let system = load_system(&a.system)?;
    let targets = io::parse_targets(&a.targets, system.len())?;
    let z = match &a.z {
        Some(s) => parse_z(s, system.len())?,
        None => vec![0.0; system.len()],
    };
    let (schedule, program) = refocus::refocus(&system, &targets, &z, ScheduleOptions { symmetrize: a.symmetrize })?;
    let infid = refocus::verify_schedule(&system, &program, &targets, &z)?;
    run.report(format!(
        "total time {} s over {} bins, {} pulses, verified infidelity {}",
        sig12(schedule.total_time()),
        schedule.durations.iter().filter(|d| **d > 0.0).count(),
        (0..system.len()).map(|k| program.pulse_count(k)).sum::<usize>(),
        sig12(infid)
    ));
    run.emit(&io::write_program(&program))
}

#[derive(Args, Debug)]
pub struct PpsArgs {
    #[arg(long)]
    system: PathBuf,
    /// two-spin-homo, two-spin-hetero, crotonic or temporal.
    #[arg(long)]
    method: String,
    /// spectrum, coefficients or both.
    #[arg(long, default_value = "spectrum")]
    report: String,
}

pub fn pps(run: &Run, a: &PpsArgs) -> Result<()> {
    let system = load_system(&a.system)?;
    let q = system.len();
    let (out, zq): (DensityState, Vec<f64>) = match a.method.as_str() {
        "two-spin-homo" => {
            let r = pps::pps_two_spin_homonuclear(&system)?;
            (r.output().clone(), r.zq_before_crush)
        }
        "two-spin-hetero" => {
            let r = pps::pps_two_spin_heteronuclear(&system)?;
            (r.output().clone(), r.zq_before_crush)
        }
        "crotonic" => {
            let r = pps::pps_crotonic_chain(&system)?;
            (r.output().clone(), r.zq_before_crush)
        }
        "temporal" => {
            let rho = DensityState::thermal_deviation(&system, None)?;
            (pps::temporal_average_by_permutation(&rho)?, Vec::new())
        }
        m => bail!("unknown pps method `{m}`"),
    };
    let (spectrum, coefficients) = match a.report.as_str() {
        "spectrum" => (true, false),
        "coefficients" => (false, true),
        "both" => (true, true),
        r => bail!("unknown report `{r}`"),
    };
    let mut text = String::new();
    writeln!(text, "method {}", a.method)?;
    for (k, z) in zq.iter().enumerate() {
        writeln!(text, "zero_quantum_before_crush[{}] {}", k + 1, sig12(*z))?;
    }
    if coefficients {
        let mut ops: BTreeMap<String, _> = BTreeMap::new();
        for k in 0..q {
            ops.insert(format!("Iz{}", k + 1), spin_op_matrix(q, k, Axis::Z));
            for l in k + 1..q {
                let m = (spin_op_matrix(q, k, Axis::Z) * spin_op_matrix(q, l, Axis::Z)).scale(2.0);
                ops.insert(format!("2Iz{}Iz{}", k + 1, l + 1), m);
            }
        }
        for (name, m) in &ops {
            writeln!(text, "coefficient {name} {}", sig12(out.coefficient(m)))?;
        }
    }
    if spectrum {
        let dev_max = out.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = out.dim() as f64;
        let scale = if dev_max > 0.0 { 0.5 / (n * n * dev_max) } else { 0.0 };
        let purity = pps::pseudo_purity(&out.to_density(scale)?)?;
        let dev = spinforge::linalg::eigh(out.matrix()).values;
        writeln!(text, "eigenvalues {}", dev.iter().map(|v| sig12(*v)).collect::<Vec<_>>().join(" "))?;
        writeln!(text, "is_pps {}", purity.is_pps)?;
        writeln!(text, "target_state {}", purity.target_index)?;
    }
    run.emit(&text)
}

#[derive(Args, Debug)]
pub struct FidArgs {
    /// Uhlmann-Jozsa fidelity of two density matrices.
    #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "unitary", required_unless_present = "unitary")]
    uj: Option<Vec<PathBuf>>,
    /// Gate fidelity |tr(A†B)/d|² of two unitaries.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    unitary: Option<Vec<PathBuf>>,
    /// fast or classic (Uhlmann-Jozsa only).
    #[arg(long, default_value = "fast")]
    method: String,
}

pub fn fid(run: &Run, a: &FidArgs) -> Result<()> {
    let value = if let Some(p) = &a.uj {
        let rho = Operator::hermitian(io::read_matrix(&p[0])?)?;
        let sigma = Operator::hermitian(io::read_matrix(&p[1])?)?;
        let method = match a.method.as_str() {
            "fast" => UjMethod::Fast,
            "classic" => UjMethod::Classic,
            m => bail!("unknown method `{m}`"),
        };
        fid::uj_fidelity(&rho, &sigma, method)?
    } else {
        let p = a.unitary.as_ref().expect("clap enforces one of --uj/--unitary");
        let u = Operator::unitary(io::read_matrix(&p[0])?)?;
        let v = Operator::unitary(io::read_matrix(&p[1])?)?;
        fid::unitary_fidelity(&u, &v)?
    };
    run.emit(&format!("{}\n", sig12(value)))
}
