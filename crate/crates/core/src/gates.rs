//! Named target gates. Spin 1 is the leftmost tensor factor.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::operator::Operator;
use crate::spinsys::{spin_op_matrix, Axis};

pub const GATE_NAMES: [&str; 10] = [
    "identity", "x", "z", "hadamard", "x90", "x180", "y90", "y180", "cnot(c,t)", "cz(c,t)",
];

fn single(name: &str) -> Option<CMatrix> {
    let rot = |axis: Axis, deg: f64| linalg::expm_hermitian(&spin_op_matrix(1, 0, axis), deg.to_radians());
    Some(match name {
        "identity" | "i" => linalg::identity(2),
        "x" | "not" => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        "z" => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        "hadamard" | "h" => {
            let s = c(FRAC_1_SQRT_2, 0.0);
            CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
        }
        "x90" => rot(Axis::X, 90.0),
        "x180" => rot(Axis::X, 180.0),
        "y90" => rot(Axis::Y, 90.0),
        "y180" => rot(Axis::Y, 180.0),
        _ => return None,
    })
}

/// `gate` on spin k (0-based), identity elsewhere.
pub fn embed(gate: &CMatrix, q: usize, k: usize) -> CMatrix {
    (0..q).fold(CMatrix::from_element(1, 1, ONE), |acc, j| {
        let f = if j == k { gate.clone() } else { linalg::identity(2) };
        linalg::kron(&acc, &f)
    })
}

fn controlled(q: usize, control: usize, target: usize, gate: &CMatrix) -> CMatrix {
    let dim = 1usize << q;
    let cm = 1usize << (q - 1 - control);
    let tm = 1usize << (q - 1 - target);
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        if col & cm == 0 {
            u[(col, col)] = ONE;
            continue;
        }
        let tb = usize::from(col & tm != 0);
        for out in 0..2 {
            let row = if out == 1 { col | tm } else { col & !tm };
            u[(row, col)] = gate[(out, tb)];
        }
    }
    u
}

fn parse_args(s: &str) -> Option<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse::<usize>().ok()).collect()
}

/// Parses names such as `x90`, `x90(2)`, `hadamard`, `cnot(1,2)` or `cz(2,3)`.
/// Spin arguments are 1-based. A single-qubit name without an argument acts on
/// every spin.
pub fn named_gate(name: &str, q: usize) -> Result<Operator> {
    if q == 0 || q > 12 {
        return Err(Error::SpinCount(q));
    }
    let unknown = || Error::Unknown {
        kind: "gate",
        name: name.to_string(),
    };
    let lower = name.trim().to_ascii_lowercase();
    let (base, args) = match lower.split_once('(') {
        Some((b, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(unknown)?;
            (b.trim().to_string(), Some(parse_args(inner).ok_or_else(unknown)?))
        }
        None => (lower.clone(), None),
    };
    let spin = |k: usize| {
        if k == 0 || k > q {
            Err(Error::SpinIndex { index: k, count: q })
        } else {
            Ok(k - 1)
        }
    };
    let m = match (base.as_str(), args.as_deref()) {
        ("cnot" | "cx" | "cz", Some([a, b])) => {
            let (ctl, tgt) = (spin(*a)?, spin(*b)?);
            if ctl == tgt {
                return Err(Error::InvalidArgument(format!("{name}: control equals target")));
            }
            let g = single(if base == "cz" { "z" } else { "x" }).expect("built-in");
            controlled(q, ctl, tgt, &g)
        }
        (b, None) => {
            let g = single(b).ok_or_else(unknown)?;
            (0..q).fold(CMatrix::from_element(1, 1, ONE), |acc, _| linalg::kron(&acc, &g))
        }
        (b, Some([k])) => embed(&single(b).ok_or_else(unknown)?, q, spin(*k)?),
        _ => return Err(unknown()),
    };
    Operator::unitary(m)
}

/// Rotation by `theta` about the equatorial axis at `phi` on one spin.
pub fn rotation(q: usize, k: usize, theta: f64, phi: f64) -> Result<Operator> {
    if k >= q {
        return Err(Error::SpinIndex { index: k, count: q });
    }
    let h = spin_op_matrix(q, k, Axis::X).scale(phi.cos()) + spin_op_matrix(q, k, Axis::Y).scale(phi.sin());
    Operator::unitary(linalg::expm_hermitian(&h, theta))
}

/// Whether two gates agree up to global phase.
pub fn same_up_to_phase(a: &Operator, b: &Operator, tol: f64) -> Result<bool> {
    Ok(1.0 - crate::fid::unitary_fidelity(a, b)? <= tol)
}
