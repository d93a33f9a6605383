use std::fmt::Write as _;
use std::path::Path;

use super::{content, fmt_real, parse_err, parse_real, source_name};
use crate::error::Result;
use crate::prop::{ChannelControls, ChannelProgram, ControlMode, PulseProgram};

struct Header {
    species: String,
    mode: ControlMode,
    amp_hz: Option<f64>,
}

fn width(mode: ControlMode) -> usize {
    if mode == ControlMode::PhaseOnly {
        1
    } else {
        2
    }
}

/// Writes a shape file. Phases are stored in degrees, reals with 9 significant digits.
pub fn write_pulse(program: &PulseProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nsteps={}", program.n_steps());
    let _ = writeln!(out, "# tau_s={}", fmt_real(program.tau()));
    for ch in program.channels() {
        let _ = write!(out, "# channel={} mode={}", ch.species, ch.controls.mode().name());
        if let ChannelControls::PhaseOnly { amp_hz, .. } = &ch.controls {
            let _ = write!(out, " amp_hz={}", fmt_real(*amp_hz));
        }
        out.push('\n');
    }
    for j in 0..program.n_steps() {
        let mut row: Vec<String> = Vec::new();
        for ch in program.channels() {
            match &ch.controls {
                ChannelControls::Xy(v) => row.extend(v[j].iter().map(|x| fmt_real(*x))),
                ChannelControls::AmpPhase(v) => {
                    row.push(fmt_real(v[j][0]));
                    row.push(fmt_real(v[j][1].to_degrees()));
                }
                ChannelControls::PhaseOnly { phases, .. } => row.push(fmt_real(phases[j].to_degrees())),
            }
        }
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_pulse(text: &str, source: &str) -> Result<PulseProgram> {
    let mut n_steps: Option<usize> = None;
    let mut tau: Option<f64> = None;
    let mut headers: Vec<Header> = Vec::new();
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        let trimmed = raw.trim();
        if let Some(h) = trimmed.strip_prefix('#') {
            let h = h.trim();
            if let Some(v) = h.strip_prefix("nsteps=") {
                n_steps = Some(v.trim().parse().map_err(|_| parse_err(source, ln, format!("bad nsteps `{v}`")))?);
            } else if let Some(v) = h.strip_prefix("tau_s=") {
                tau = Some(parse_real(source, ln, v.trim(), "tau_s")?);
            } else if h.starts_with("channel=") {
                headers.push(parse_channel(h, source, ln)?);
            }
            continue;
        }
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        if n_steps.is_none() || tau.is_none() {
            return Err(parse_err(source, ln, "data row before `# nsteps=` and `# tau_s=` headers"));
        }
        let vals = line
            .split_whitespace()
            .map(|t| parse_real(source, ln, t, "value"))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((ln, vals));
    }
    let last = text.lines().count().max(1);
    let n_steps = n_steps.ok_or_else(|| parse_err(source, last, "missing `# nsteps=` header"))?;
    let tau = tau.ok_or_else(|| parse_err(source, last, "missing `# tau_s=` header"))?;
    let cols: usize = headers.iter().map(|h| width(h.mode)).sum();
    // A free-evolution program has no columns, so its rows are blank.
    if cols > 0 && rows.len() != n_steps {
        return Err(parse_err(source, last, format!("found {} rows, header says {n_steps}", rows.len())));
    }
    for (ln, r) in &rows {
        if r.len() != cols {
            return Err(parse_err(source, *ln, format!("row has {} values, expected {cols}", r.len())));
        }
    }
    let mut channels = Vec::new();
    let mut col = 0;
    for h in headers {
        let pair = |j: usize| [rows[j].1[col], rows[j].1[col + 1]];
        let controls = match h.mode {
            ControlMode::Xy => ChannelControls::Xy((0..n_steps).map(pair).collect()),
            ControlMode::AmpPhase => ChannelControls::AmpPhase(
                (0..n_steps).map(|j| [pair(j)[0], pair(j)[1].to_radians()]).collect(),
            ),
            ControlMode::PhaseOnly => ChannelControls::PhaseOnly {
                amp_hz: h.amp_hz.unwrap_or_default(),
                phases: rows.iter().map(|(_, r)| r[col].to_radians()).collect(),
            },
        };
        col += width(h.mode);
        channels.push(ChannelProgram {
            species: h.species,
            controls,
        });
    }
    PulseProgram::new(tau, n_steps, channels)
}

fn parse_channel(h: &str, source: &str, ln: usize) -> Result<Header> {
    let (mut species, mut mode, mut amp) = (None, None, None);
    for kv in h.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| parse_err(source, ln, format!("expected key=value, got `{kv}`")))?;
        match k {
            "channel" => species = Some(v.to_string()),
            "mode" => mode = Some(ControlMode::parse(v).map_err(|e| parse_err(source, ln, e.to_string()))?),
            "amp_hz" => amp = Some(parse_real(source, ln, v, "amp_hz")?),
            _ => return Err(parse_err(source, ln, format!("unknown channel key `{k}`"))),
        }
    }
    let mode = mode.ok_or_else(|| parse_err(source, ln, "channel header lacks mode="))?;
    if mode == ControlMode::PhaseOnly && amp.is_none() {
        return Err(parse_err(source, ln, "phase_only channel needs amp_hz="));
    }
    Ok(Header {
        species: species.unwrap_or_default(),
        mode,
        amp_hz: amp,
    })
}

pub fn read_pulse(path: impl AsRef<Path>) -> Result<PulseProgram> {
    let path = path.as_ref();
    parse_pulse(&std::fs::read_to_string(path)?, &source_name(path))
}
