//! Dense complex matrix helpers built on nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Hilbert-Schmidt inner product tr(A†B).
pub fn inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// tr(AB) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn diag_matrix(d: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(d.len(), d.len());
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest elementwise |A − B|.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let p = u.adjoint() * u;
    max_abs_diff(&p, &identity(u.nrows()))
}

pub fn is_diagonal(a: &CMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == ZERO))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// V f(Λ) V†.
    pub fn map<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// exp(−i H t).
    pub fn exp_i(&self, t: f64) -> CMatrix {
        self.map(|l| Complex64::from_polar(1.0, -l * t))
    }
}

/// Hermitian eigendecomposition. Diagonal inputs skip the iterative solver.
pub fn eigh(h: &CMatrix) -> HermitianEigen {
    let n = h.nrows();
    if is_diagonal(h) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| h[(a, a)].re.total_cmp(&h[(b, b)].re));
        let mut vectors = CMatrix::zeros(n, n);
        for (col, &row) in idx.iter().enumerate() {
            vectors[(row, col)] = ONE;
        }
        let values = idx.iter().map(|&i| h[(i, i)].re).collect();
        return HermitianEigen { values, vectors };
    }
    // nalgebra reads one triangle; symmetrize so roundoff asymmetry cannot leak in.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, idx[col])]);
    HermitianEigen { values, vectors }
}

/// exp(−i H t) for Hermitian H.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    if is_diagonal(h) {
        let n = h.nrows();
        let mut u = CMatrix::zeros(n, n);
        for i in 0..n {
            u[(i, i)] = Complex64::from_polar(1.0, -h[(i, i)].re * t);
        }
        return u;
    }
    eigh(h).exp_i(t)
}

/// Principal square root of a positive semidefinite matrix; negative eigenvalues clamp to 0.
pub fn sqrtm_psd(a: &CMatrix) -> CMatrix {
    eigh(a).map(|l| c(l.max(0.0).sqrt(), 0.0))
}

/// Eigenvalues of a general square matrix via the complex Schur form.
pub fn eigvals_general(a: &CMatrix) -> Vec<Complex64> {
    let (_, t) = a.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// Random generators used by tests and the CLI's synthetic inputs.
pub mod random {
    use super::*;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    }

    pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| gaussian(rng))
    }

    /// (G + G†)/2 with Ginibre G.
    pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let g = ginibre(n, rng);
        (&g + g.adjoint()).scale(0.5)
    }

    /// Haar-random unitary from the QR decomposition of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let qr = ginibre(n, rng).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..n {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
        q
    }

    /// A A† / tr(A A†) with complex Gaussian A.
    pub fn density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let a = ginibre(n, rng);
        let m = &a * a.adjoint();
        let t = super::trace(&m).re;
        let m = m.unscale(t);
        (&m + m.adjoint()).scale(0.5)
    }

    /// Rank-deficient density matrix of the given rank.
    pub fn density_rank<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
        let a = CMatrix::from_fn(n, rank, |_, _| gaussian(rng));
        let m = &a * a.adjoint();
        let t = super::trace(&m).re;
        let m = m.unscale(t);
        (&m + m.adjoint()).scale(0.5)
    }

    pub fn pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
        let v = CVector::from_fn(n, |_, _| gaussian(rng));
        let nrm = v.norm();
        v.unscale(nrm)
    }
}
