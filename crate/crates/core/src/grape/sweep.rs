use num_complex::Complex64;

use super::{GradientMode, GrapeProblem, MemberModel};
use crate::error::Result;
use crate::linalg::{self, CMatrix, HermitianEigen, ZERO};
use crate::operator::Operator;
use crate::prop::{self, ControlMode, EnsembleMember, PulseProgram, StepModel};
use crate::spinsys::SpinSystem;

/// Forward products X_j = V_j⋯V_1 and backward targets P_j = V_{j+1}†⋯V_n†U, j = 0..=n.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub x: Vec<CMatrix>,
    pub p: Vec<CMatrix>,
    pub phi4: f64,
}

impl Sweep {
    /// ⟨P_j|X_j⟩⟨X_j|P_j⟩; independent of j.
    pub fn phi4_at(&self, j: usize) -> f64 {
        linalg::inner(&self.p[j], &self.x[j]).norm_sqr()
    }
}

pub fn forward_backward(
    system: &SpinSystem,
    program: &PulseProgram,
    target: &Operator,
    member: &EnsembleMember,
) -> Result<Sweep> {
    let model = StepModel::for_program(system, program, member)?;
    if target.dim() != model.dim {
        return Err(crate::Error::DimensionMismatch(target.dim(), model.dim));
    }
    let vs = prop::step_propagators(&model, program);
    let n = vs.len();
    let mut x = Vec::with_capacity(n + 1);
    x.push(linalg::identity(model.dim));
    for v in &vs {
        let next = v * x.last().expect("nonempty");
        x.push(next);
    }
    let mut p = vec![target.matrix().clone(); n + 1];
    for j in (0..n).rev() {
        p[j] = vs[j].adjoint() * &p[j + 1];
    }
    let phi4 = linalg::inner(target.matrix(), &x[n]).norm_sqr();
    Ok(Sweep { x, p, phi4 })
}

/// e^{−iφFz} V e^{iφFz} as an elementwise phase.
fn phase_conjugate(vx: &CMatrix, fz: &[f64], phi: f64) -> CMatrix {
    let n = fz.len();
    let mut v = vx.clone();
    for r in 0..n {
        for c in 0..n {
            v[(r, c)] *= Complex64::from_polar(1.0, -phi * (fz[r] - fz[c]));
        }
    }
    v
}

fn step_matrix(problem: &GrapeProblem, m: &MemberModel, params: &[f64], j: usize) -> CMatrix {
    if let (ControlMode::PhaseOnly, Some(vx)) = (problem.template.mode, &m.vx) {
        if problem.template.channels.len() == 1 {
            return phase_conjugate(vx, &m.model.channels[0].fz, params[j]);
        }
    }
    linalg::expm_hermitian(&m.model.hamiltonian(&problem.step_xy(params, j)), problem.template.tau_s)
}

pub(crate) fn member_phi4(problem: &GrapeProblem, m: &MemberModel, params: &[f64]) -> f64 {
    let mut v = linalg::identity(m.model.dim);
    for j in 0..problem.template.n_steps {
        v = step_matrix(problem, m, params, j) * v;
    }
    linalg::inner(&m.target, &v).norm_sqr()
}

/// Stable (e^{a_l} − e^{a_m})/(a_l − a_m) with a = −iλτ.
fn divided_difference(l: f64, m: f64, tau: f64) -> Complex64 {
    let x = 0.5 * (l - m) * tau;
    let sinc = if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    };
    Complex64::from_polar(sinc, -0.5 * (l + m) * tau)
}

/// Σ_ab A_ab B_ba.
fn tr_prod(a: &CMatrix, b: &CMatrix) -> Complex64 {
    linalg::trace_product(a, b)
}

/// Φ₄ and ∂Φ₄/∂x for one member, with x in the template's own parameterization.
pub(crate) fn member_gradient(
    problem: &GrapeProblem,
    m: &MemberModel,
    params: &[f64],
    mode: GradientMode,
) -> (f64, Vec<f64>) {
    let t = &problem.template;
    let n = t.n_steps;
    let nch = t.channels.len();
    let tau = t.tau_s;
    let dim = m.model.dim;

    let mut eigs: Vec<Option<HermitianEigen>> = Vec::with_capacity(n);
    let mut vs: Vec<CMatrix> = Vec::with_capacity(n);
    for j in 0..n {
        if mode == GradientMode::Exact {
            let e = linalg::eigh(&m.model.hamiltonian(&problem.step_xy(params, j)));
            vs.push(e.exp_i(tau));
            eigs.push(Some(e));
        } else {
            vs.push(step_matrix(problem, m, params, j));
            eigs.push(None);
        }
    }
    let mut xs = Vec::with_capacity(n + 1);
    xs.push(linalg::identity(dim));
    for v in &vs {
        let next = v * xs.last().expect("nonempty");
        xs.push(next);
    }
    let g = linalg::inner(&m.target, &xs[n]);
    let phi = g.norm_sqr();
    let gc = g.conj();

    // dxy[j][c] = (∂Φ/∂αx, ∂Φ/∂αy) for the Cartesian modes.
    let mut dxy = vec![vec![(0.0, 0.0); nch]; n];
    let mut dphase = vec![0.0; if mode == GradientMode::PhaseOnlyExact { n } else { 0 }];
    let mut p = m.target.clone();
    for j in (0..n).rev() {
        match mode {
            GradientMode::Approx => {
                // −2 Re(iτ tr(X_j P_j† B) ḡ)
                let mm = &xs[j + 1] * p.adjoint();
                for (c, ch) in m.model.channels.iter().enumerate() {
                    let gx = tr_prod(&mm, &ch.fx) * ch.gain;
                    let gy = tr_prod(&mm, &ch.fy) * ch.gain;
                    let f = |z: Complex64| -2.0 * (Complex64::new(0.0, tau) * z * gc).re;
                    dxy[j][c] = (f(gx), f(gy));
                }
            }
            GradientMode::Exact => {
                let e = eigs[j].as_ref().expect("eigensystem stored");
                let q = &e.vectors;
                let mm = &xs[j] * p.adjoint();
                let mq = q.adjoint() * mm * q;
                let mut gamma = CMatrix::from_element(dim, dim, ZERO);
                for a in 0..dim {
                    for b in 0..dim {
                        gamma[(a, b)] = divided_difference(e.values[a], e.values[b], tau);
                    }
                }
                for (c, ch) in m.model.channels.iter().enumerate() {
                    let mut comp = [0.0; 2];
                    for (k, op) in [&ch.fx, &ch.fy].into_iter().enumerate() {
                        let bq = q.adjoint() * op * q;
                        let mut acc = ZERO;
                        for a in 0..dim {
                            for b in 0..dim {
                                acc += mq[(a, b)] * bq[(b, a)] * gamma[(b, a)];
                            }
                        }
                        let dg = acc * Complex64::new(0.0, -tau * ch.gain);
                        comp[k] = 2.0 * (dg * gc).re;
                    }
                    dxy[j][c] = (comp[0], comp[1]);
                }
            }
            GradientMode::PhaseOnlyExact => {
                let fz = &m.model.channels[0].fz;
                let mm = &xs[j] * p.adjoint();
                let v = &vs[j];
                let mut acc = ZERO;
                for r in 0..dim {
                    for c in 0..dim {
                        acc += mm[(c, r)] * v[(r, c)] * Complex64::new(0.0, fz[c] - fz[r]);
                    }
                }
                dphase[j] = 2.0 * (acc * gc).re;
            }
        }
        p = vs[j].adjoint() * p;
    }

    let mut grad = vec![0.0; t.n_params()];
    if mode == GradientMode::PhaseOnlyExact {
        grad.copy_from_slice(&dphase);
        return (phi, grad);
    }
    for j in 0..n {
        for (c, ch) in t.channels.iter().enumerate() {
            let (gx, gy) = dxy[j][c];
            match t.mode {
                ControlMode::Xy => {
                    let b = (j * nch + c) * 2;
                    grad[b] = gx;
                    grad[b + 1] = gy;
                }
                ControlMode::AmpPhase => {
                    let b = (j * nch + c) * 2;
                    let (a, ph) = (params[b], params[b + 1]);
                    grad[b] = ph.cos() * gx + ph.sin() * gy;
                    grad[b + 1] = a * (-ph.sin() * gx + ph.cos() * gy);
                }
                ControlMode::PhaseOnly => {
                    let ph = params[j * nch + c];
                    grad[j * nch + c] = ch.amp_hz * (-ph.sin() * gx + ph.cos() * gy);
                }
            }
        }
    }
    (phi, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divided_difference_limits() {
        let d = divided_difference(2.0, 2.0, 0.3);
        let e = Complex64::from_polar(1.0, -0.6);
        assert!((d - e).norm() < 1e-15);
        let (l, m, tau) = (1.3, -0.4, 0.7);
        let direct = (Complex64::from_polar(1.0, -l * tau) - Complex64::from_polar(1.0, -m * tau))
            / Complex64::new(0.0, -(l - m) * tau);
        assert!((divided_difference(l, m, tau) - direct).norm() < 1e-14);
        let near = divided_difference(1.0, 1.0 + 1e-12, 1.0);
        assert!(near.re.is_finite() && near.im.is_finite());
    }
}
