use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{content, fmt_real, parse_err, parse_real, source_name};
use crate::error::Result;
use crate::spinsys::{Spin, SpinSystem, MAX_SPINS};

#[derive(PartialEq)]
enum Section {
    None,
    Spins,
    Couplings,
}

pub fn load_spin_system(path: impl AsRef<Path>) -> Result<SpinSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_spin_system(&text, &source_name(path))
}

/// Parses the `[spins]` / `[couplings]` format. Spin labels are species
/// followed by the file index, e.g. `C2`.
pub fn parse_spin_system(text: &str, source: &str) -> Result<SpinSystem> {
    let mut section = Section::None;
    let mut spins: BTreeMap<usize, (String, f64, usize)> = BTreeMap::new();
    let mut couplings: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "[spins]" => {
                section = Section::Spins;
                continue;
            }
            "[couplings]" => {
                section = Section::Couplings;
                continue;
            }
            s if s.starts_with('[') => return Err(parse_err(source, ln, format!("unknown section {line}"))),
            _ => {}
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::None => return Err(parse_err(source, ln, "data before any section header")),
            Section::Spins => {
                let [idx, species, off] = toks[..] else {
                    return Err(parse_err(source, ln, "expected `index species offset_hz`"));
                };
                let idx: usize = idx
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| parse_err(source, ln, format!("bad spin index `{idx}`")))?;
                let off = parse_real(source, ln, off, "offset")?;
                if spins.insert(idx, (species.to_string(), off, ln)).is_some() {
                    return Err(parse_err(source, ln, format!("spin {idx} defined twice")));
                }
                if spins.len() > MAX_SPINS {
                    return Err(parse_err(source, ln, format!("more than {MAX_SPINS} spins")));
                }
            }
            Section::Couplings => {
                let [i, j, jhz] = toks[..] else {
                    return Err(parse_err(source, ln, "expected `i j J_hz`"));
                };
                let idx = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| parse_err(source, ln, format!("bad spin index `{t}`")))
                };
                let (i, j) = (idx(i)?, idx(j)?);
                let jhz = parse_real(source, ln, jhz, "coupling")?;
                couplings.push((i, j, jhz, ln));
            }
        }
    }
    if spins.is_empty() {
        return Err(parse_err(source, text.lines().count().max(1), "no spins defined"));
    }
    for (expect, (&idx, (_, _, ln))) in (1..).zip(&spins) {
        if idx != expect {
            return Err(parse_err(source, *ln, format!("spin indices must be 1..={}, found {idx}", spins.len())));
        }
    }
    let q = spins.len();
    let mut seen = BTreeMap::new();
    for &(i, j, _, ln) in &couplings {
        for k in [i, j] {
            if k == 0 || k > q {
                return Err(parse_err(source, ln, format!("unknown spin index {k}")));
            }
        }
        if i == j {
            return Err(parse_err(source, ln, format!("self-coupling on spin {i}")));
        }
        if let Some(prev) = seen.insert((i.min(j), i.max(j)), ln) {
            return Err(parse_err(source, ln, format!("duplicate coupling {i} {j} (first on line {prev})")));
        }
    }
    let spins: Vec<Spin> = spins
        .into_iter()
        .map(|(idx, (species, off, _))| Spin::new(format!("{species}{idx}"), species, off))
        .collect();
    SpinSystem::new(spins, couplings.into_iter().map(|(i, j, jhz, _)| ((i - 1, j - 1), jhz)))
}

pub fn write_spin_system(system: &SpinSystem) -> String {
    let mut out = String::from("[spins]\n");
    for (k, s) in system.spins().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", k + 1, s.species, fmt_real(s.offset_hz));
    }
    out.push_str("[couplings]\n");
    for (&(i, j), jhz) in system.couplings() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_real(*jhz));
    }
    out
}
