use std::fmt::Write as _;
use std::path::Path;

use super::{content, parse_err, parse_real, source_name};
use crate::error::Result;
use crate::refocus::{ProgramOp, RefocusProgram};

/// `delay <s>` and `pulse180 spin=<k> phase_deg=<φ>` lines. Values use the
/// shortest representation that reads back exactly.
pub fn write_program(program: &RefocusProgram) -> String {
    let mut out = format!("# spins={}\n", program.n_spins);
    for op in &program.ops {
        let _ = match op {
            ProgramOp::Delay(t) => writeln!(out, "delay {t:e}"),
            ProgramOp::Pulse180 { spin, phase_deg } => {
                writeln!(out, "pulse180 spin={} phase_deg={phase_deg}", spin + 1)
            }
        };
    }
    out
}

/// `n_spins` bounds the spin indices; a `# spins=` header, if present, must agree.
pub fn parse_program(text: &str, source: &str, n_spins: usize) -> Result<RefocusProgram> {
    let mut ops = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        if let Some(v) = raw.trim().strip_prefix("# spins=") {
            if v.trim().parse::<usize>().ok() != Some(n_spins) {
                return Err(parse_err(source, ln, format!("program is for `{v}` spins, system has {n_spins}")));
            }
            continue;
        }
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[..] {
            ["delay", t] => {
                let t = parse_real(source, ln, t, "delay")?;
                if t < 0.0 {
                    return Err(parse_err(source, ln, "negative delay"));
                }
                ops.push(ProgramOp::Delay(t));
            }
            ["pulse180", a, b] => {
                let spin = a
                    .strip_prefix("spin=")
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&k| k >= 1 && k <= n_spins)
                    .ok_or_else(|| parse_err(source, ln, format!("bad or out-of-range `{a}`")))?;
                let phase = b
                    .strip_prefix("phase_deg=")
                    .ok_or_else(|| parse_err(source, ln, format!("expected phase_deg=, got `{b}`")))?;
                ops.push(ProgramOp::Pulse180 {
                    spin: spin - 1,
                    phase_deg: parse_real(source, ln, phase, "phase")?,
                });
            }
            _ => return Err(parse_err(source, ln, format!("unrecognised instruction `{line}`"))),
        }
    }
    Ok(RefocusProgram { n_spins, ops })
}

pub fn read_program(path: impl AsRef<Path>, n_spins: usize) -> Result<RefocusProgram> {
    let path = path.as_ref();
    parse_program(&std::fs::read_to_string(path)?, &source_name(path), n_spins)
}
