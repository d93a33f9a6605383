use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const MAX_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Hermitian,
    Unitary,
    General,
}

/// A dense 2^q × 2^q complex matrix with a validated kind tag.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    kind: OpKind,
}

fn check_shape(m: &CMatrix) -> Result<()> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(n, m.ncols()));
    }
    if n == 0 || !n.is_power_of_two() || n > MAX_DIM {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

impl Operator {
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        check_shape(&matrix)?;
        let d = linalg::hermitian_defect(&matrix);
        if !(d <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(d));
        }
        Ok(Self {
            matrix,
            kind: OpKind::Hermitian,
        })
    }

    pub fn unitary(matrix: CMatrix) -> Result<Self> {
        check_shape(&matrix)?;
        let d = linalg::unitarity_defect(&matrix);
        if !(d <= UNITARY_TOL) {
            return Err(Error::NotUnitary(d));
        }
        Ok(Self {
            matrix,
            kind: OpKind::Unitary,
        })
    }

    pub fn general(matrix: CMatrix) -> Result<Self> {
        check_shape(&matrix)?;
        Ok(Self {
            matrix,
            kind: OpKind::General,
        })
    }

    /// Tags as Hermitian after explicit symmetrization (A + A†)/2.
    pub fn hermitian_symmetrized(matrix: CMatrix) -> Result<Self> {
        check_shape(&matrix)?;
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self {
            matrix: sym,
            kind: OpKind::Hermitian,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::unitary(linalg::identity(dim))
    }

    pub(crate) fn from_parts(matrix: CMatrix, kind: OpKind) -> Self {
        debug_assert!(matrix.nrows().is_power_of_two());
        Self { matrix, kind }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            kind: self.kind,
        }
    }

    /// Matrix product; unitary only if both factors are.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let kind = if self.kind == OpKind::Unitary && other.kind == OpKind::Unitary {
            OpKind::Unitary
        } else {
            OpKind::General
        };
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            kind,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            Operator::general(CMatrix::zeros(3, 3)),
            Err(Error::InvalidDimension(3))
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(Operator::hermitian(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::identity(2, 2).scale(1.001);
        assert!(matches!(Operator::unitary(m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn qubit_count() {
        assert_eq!(Operator::identity(8).unwrap().n_qubits(), 3);
    }
}
