//! Plain-text file formats. Spin indices are 1-based in every file.

mod matrix;
mod program;
mod pulse;
mod spins;
mod targets;

pub use matrix::{parse_matrix, read_matrix, write_matrix};
pub use program::{parse_program, read_program, write_program};
pub use pulse::{parse_pulse, read_pulse, write_pulse};
pub use spins::{load_spin_system, parse_spin_system, write_spin_system};
pub use targets::parse_targets;

use crate::error::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First line of every CSV artifact.
pub fn csv_header(seed: u64) -> String {
    format!("# spinforge {VERSION} seed={seed}")
}

/// Format used for every real written to a file: 9 significant digits.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.8e}")
}

pub(crate) fn parse_err(source: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_real(source: &str, line: usize, tok: &str, what: &str) -> crate::Result<f64> {
    match tok.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(parse_err(source, line, format!("bad {what} `{tok}`"))),
    }
}

/// Strips a trailing `#` comment and surrounding whitespace.
pub(crate) fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub(crate) fn source_name(path: &std::path::Path) -> String {
    path.display().to_string()
}
