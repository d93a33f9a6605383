//! Single-spin propagators in the two-parameter form [[a, b], [−b*, a*]].

use std::ops::Mul;

use num_complex::Complex64;

use crate::linalg::{c, CMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2 {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su2 {
    pub const IDENTITY: Su2 = Su2 {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    /// exp(−i t (hx Ix + hy Iy + hz Iz)).
    pub fn evolve(h: [f64; 3], t: f64) -> Self {
        let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        if norm == 0.0 {
            return Self::IDENTITY;
        }
        let half = 0.5 * norm * t;
        let (s, co) = half.sin_cos();
        let (nx, ny, nz) = (h[0] / norm, h[1] / norm, h[2] / norm);
        Self {
            a: c(co, -s * nz),
            b: c(-s * ny, -s * nx),
        }
    }

    /// Rotation by `theta` about the equatorial axis at angle `phi`.
    pub fn rotation(theta: f64, phi: f64) -> Self {
        Self::evolve([phi.cos(), phi.sin(), 0.0], theta)
    }

    pub fn rz(theta: f64) -> Self {
        Self::evolve([0.0, 0.0, 1.0], theta)
    }

    pub fn to_matrix(self) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[self.a, self.b, -self.b.conj(), self.a.conj()])
    }

    pub fn dagger(self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn trace(self) -> f64 {
        2.0 * self.a.re
    }

    /// |tr(U†V)/2|² against another element; the trace is real on SU(2).
    pub fn fidelity(self, other: Su2) -> f64 {
        (self.a.conj() * other.a + self.b.conj() * other.b).re.powi(2)
    }
}

impl Mul for Su2 {
    type Output = Su2;

    fn mul(self, r: Su2) -> Su2 {
        Su2 {
            a: self.a * r.a - self.b * r.b.conj(),
            b: self.a * r.b + self.b * r.a.conj(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, max_abs_diff};
    use crate::spinsys::{spin_op_matrix, Axis};

    #[test]
    fn matches_generic_exponential() {
        let h = [0.3, -1.2, 0.7];
        let m = spin_op_matrix(1, 0, Axis::X).scale(h[0])
            + spin_op_matrix(1, 0, Axis::Y).scale(h[1])
            + spin_op_matrix(1, 0, Axis::Z).scale(h[2]);
        let u = expm_hermitian(&m, 1.9);
        assert!(max_abs_diff(&Su2::evolve(h, 1.9).to_matrix(), &u) < 1e-14);
    }

    #[test]
    fn product_matches_matrix_product() {
        let p = Su2::rotation(1.0, 0.3);
        let q = Su2::evolve([0.1, 0.2, 0.9], 2.0);
        let m = p.to_matrix() * q.to_matrix();
        assert!(max_abs_diff(&(p * q).to_matrix(), &m) < 1e-15);
    }

    #[test]
    fn fidelity_ignores_global_sign() {
        let p = Su2::rotation(std::f64::consts::PI, 0.0);
        let q = Su2::rotation(3.0 * std::f64::consts::PI, 0.0);
        assert!((p.fidelity(q) - 1.0).abs() < 1e-15);
    }
}
