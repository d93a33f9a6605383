//! Gate, state and mixed-state fidelities.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::operator::Operator;
use crate::prop::{self, EnsembleSpec, PulseProgram};
use crate::spinsys::SpinSystem;

fn same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// |tr(U†V)/tr(U†U)|² before clamping.
pub fn unitary_fidelity_raw(u: &Operator, v: &Operator) -> Result<f64> {
    same_dim(u, v)?;
    let num = linalg::inner(u.matrix(), v.matrix());
    let den = linalg::inner(u.matrix(), u.matrix());
    Ok((num / den).norm_sqr())
}

/// Global-phase-insensitive gate fidelity in [0, 1].
pub fn unitary_fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    Ok(unitary_fidelity_raw(u, v)?.clamp(0.0, 1.0))
}

/// Φ₄ = |tr(U†V)|²; equals 4^q at perfect overlap.
pub fn phi4(u: &Operator, v: &Operator) -> Result<f64> {
    same_dim(u, v)?;
    Ok(linalg::inner(u.matrix(), v.matrix()).norm_sqr())
}

const DENSITY_PSD_TOL: f64 = 1e-10;
const DENSITY_TRACE_TOL: f64 = 1e-8;

/// Checks Hermiticity, unit trace and eigenvalues ≥ −1e-10; returns the eigenvalues.
pub fn validate_density(rho: &Operator) -> Result<Vec<f64>> {
    let m = rho.matrix();
    let h = linalg::hermitian_defect(m);
    if h > DENSITY_PSD_TOL {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {h:e})")));
    }
    let tr = linalg::trace(m);
    if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    let ev = linalg::eigh(m).values;
    if ev[0] < -DENSITY_PSD_TOL {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {:e}",
            ev[0]
        )));
    }
    Ok(ev)
}

/// ⟨ψ|ρ|ψ⟩ for normalized ψ.
pub fn state_fidelity(psi: &CVector, rho: &Operator) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch(psi.len(), rho.dim()));
    }
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("norm {n} differs from 1")));
    }
    validate_density(rho)?;
    let v = psi.adjoint() * rho.matrix() * psi;
    Ok(v[(0, 0)].re.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UjMethod {
    /// [tr √(√ρ σ √ρ)]².
    Classic,
    /// [Σ √λ(ρσ)]².
    Fast,
}

/// Eigenvalues this close to zero are treated as exact zeros.
fn eigen_floor(dim: usize) -> f64 {
    8.0 * dim as f64 * f64::EPSILON
}

fn sqrt_clamped(l: f64, floor: f64) -> f64 {
    if l <= floor {
        0.0
    } else {
        l.sqrt()
    }
}

/// Uhlmann-Jozsa fidelity before clamping to [0, 1].
///
/// The fast form loses accuracy when both arguments are rank deficient with
/// orthogonal supports (ρσ is then nilpotent); the classic form does not.
pub fn uj_fidelity_raw(rho: &Operator, sigma: &Operator, method: UjMethod) -> Result<f64> {
    same_dim(rho, sigma)?;
    validate_density(rho)?;
    validate_density(sigma)?;
    let n = rho.dim();
    let floor = eigen_floor(n);
    let s = match method {
        UjMethod::Classic => {
            let sr = linalg::eigh(rho.matrix()).map(|l| c(sqrt_clamped(l, floor), 0.0));
            let m = &sr * sigma.matrix() * &sr;
            let m = (&m + m.adjoint()).scale(0.5);
            linalg::eigh(&m)
                .values
                .iter()
                .map(|&l| sqrt_clamped(l, floor))
                .sum::<f64>()
        }
        UjMethod::Fast => {
            let p = rho.matrix() * sigma.matrix();
            linalg::eigvals_general(&p)
                .iter()
                .map(|z: &Complex64| sqrt_clamped(z.re, floor))
                .sum::<f64>()
        }
    };
    Ok(s * s)
}

pub fn uj_fidelity(rho: &Operator, sigma: &Operator, method: UjMethod) -> Result<f64> {
    Ok(uj_fidelity_raw(rho, sigma, method)?.clamp(0.0, 1.0))
}

/// tr(ρσ). Diagnostic only: it is not a fidelity between arbitrary mixed
/// states (it does not reach 1 for ρ = σ unless ρ is pure) and is meaningful
/// only when comparing one state against unitary transforms of another.
pub fn naive_overlap(rho: &Operator, sigma: &Operator) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(linalg::trace_product(rho.matrix(), sigma.matrix()).re)
}

/// Mean over initial states +x, +y, +z of |⟨Uψ|Vψ⟩|² (single qubit).
pub fn cardinal_average_fidelity(u_target: &Operator, v: &Operator) -> Result<f64> {
    if u_target.dim() != 2 {
        return Err(Error::DimensionMismatch(u_target.dim(), 2));
    }
    same_dim(u_target, v)?;
    Ok(cardinal_average_matrix(u_target.matrix(), v.matrix()))
}

pub(crate) fn cardinal_states() -> [CVector; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]),
        CVector::from_vec(vec![c(s, 0.0), c(0.0, s)]),
        CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
    ]
}

pub(crate) fn cardinal_average_matrix(u: &CMatrix, v: &CMatrix) -> f64 {
    cardinal_states()
        .iter()
        .map(|psi| {
            let a = u * psi;
            let b = v * psi;
            a.dotc(&b).norm_sqr()
        })
        .sum::<f64>()
        / 3.0
}

/// Single-qubit state ½E + r(sinθ cosφ I_x + sinθ sinφ I_y + cosθ I_z).
pub fn bloch_state(r: f64, theta: f64, phi: f64) -> Result<Operator> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidState(format!("Bloch radius {r} outside [0, 1]")));
    }
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let h = 0.5 * r;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 + h * ct, 0.0),
            c(h * st * cp, -h * st * sp),
            c(h * st * cp, h * st * sp),
            c(0.5 - h * ct, 0.0),
        ],
    );
    Operator::hermitian(m)
}

/// Fidelity against a reference over a Bloch (r, θ) grid at φ = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochScan {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// Row-major with r varying slowest.
    pub fidelity: Vec<f64>,
}

impl BlochScan {
    pub fn at(&self, i_r: usize, i_theta: usize) -> f64 {
        self.fidelity[i_r * self.theta.len() + i_theta]
    }

    /// Grid indices of the largest value, first one on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.fidelity.iter().enumerate() {
            if *v > self.fidelity[best] {
                best = k;
            }
        }
        (best / self.theta.len(), best % self.theta.len())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,theta,fidelity\n");
        for (i, r) in self.r.iter().enumerate() {
            for (j, t) in self.theta.iter().enumerate() {
                s.push_str(&format!("{r:.6},{t:.6},{:.12e}\n", self.at(i, j)));
            }
        }
        s
    }
}

/// r over [0, 1] and θ over [0, π], `n` points each.
pub fn bloch_scan(reference: &Operator, n: usize, method: UjMethod) -> Result<BlochScan> {
    if n < 2 {
        return Err(Error::InvalidArgument("Bloch scan needs at least 2 points per axis".into()));
    }
    let step = |k: usize, hi: f64| hi * k as f64 / (n - 1) as f64;
    let r: Vec<f64> = (0..n).map(|k| step(k, 1.0)).collect();
    let theta: Vec<f64> = (0..n).map(|k| step(k, std::f64::consts::PI)).collect();
    let fidelity = (0..n * n)
        .into_par_iter()
        .map(|k| uj_fidelity(reference, &bloch_state(r[k / n], theta[k % n], 0.0)?, method))
        .collect::<Result<Vec<f64>>>()?;
    Ok(BlochScan { r, theta, fidelity })
}

/// Σ_m w_m F(U, V_m).
pub fn ensemble_fidelity(
    system: &SpinSystem,
    program: &PulseProgram,
    target: &Operator,
    ensemble: &EnsembleSpec,
) -> Result<f64> {
    let targets = vec![target.clone(); ensemble.len()];
    ensemble_fidelity_with_targets(system, program, &targets, ensemble)
}

/// Ensemble fidelity with one target per member.
pub fn ensemble_fidelity_with_targets(
    system: &SpinSystem,
    program: &PulseProgram,
    targets: &[Operator],
    ensemble: &EnsembleSpec,
) -> Result<f64> {
    if targets.len() != ensemble.len() {
        return Err(Error::DimensionMismatch(targets.len(), ensemble.len()));
    }
    program.check_against(system)?;
    let parts: Vec<Result<f64>> = ensemble
        .members()
        .par_iter()
        .zip(targets.par_iter())
        .map(|(m, u)| {
            let v = prop::sequence_propagator(system, program, m)?;
            Ok(m.weight * unitary_fidelity(u, &v)?)
        })
        .collect();
    let mut acc = 0.0;
    for p in parts {
        acc += p?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_matrix, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x_gate() -> Operator {
        Operator::unitary(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])).unwrap()
    }

    fn z_gate() -> Operator {
        Operator::unitary(diag_matrix(&[1.0, -1.0])).unwrap()
    }

    fn dens(d: &[f64]) -> Operator {
        Operator::hermitian(diag_matrix(d)).unwrap()
    }

    #[test]
    fn unitary_fidelity_examples() {
        let x = x_gate();
        assert_eq!(unitary_fidelity(&x, &x).unwrap(), 1.0);
        let rx = linalg::expm_hermitian(&crate::spinsys::spin_op_matrix(1, 0, crate::spinsys::Axis::X), std::f64::consts::PI);
        let f = unitary_fidelity(&x, &Operator::unitary(rx).unwrap()).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        let id = Operator::identity(2).unwrap();
        assert_eq!(unitary_fidelity(&id, &x).unwrap(), 0.0);
        assert!(unitary_fidelity(&id, &Operator::identity(4).unwrap()).is_err());
    }

    #[test]
    fn phi4_examples() {
        let id2 = Operator::identity(2).unwrap();
        let id4 = Operator::identity(4).unwrap();
        assert!((phi4(&id2, &id2).unwrap() - 4.0).abs() < 1e-15);
        assert!((phi4(&id4, &id4).unwrap() - 16.0).abs() < 1e-15);
        let ph = Operator::unitary(linalg::identity(4) * Complex64::from_polar(1.0, 0.7)).unwrap();
        assert!((phi4(&id4, &ph).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn state_fidelity_examples() {
        let psi0 = CVector::from_vec(vec![c(1., 0.), c(0., 0.)]);
        assert!((state_fidelity(&psi0, &dens(&[0.75, 0.25])).unwrap() - 0.75).abs() < 1e-15);
        assert!((state_fidelity(&psi0, &dens(&[0.5, 0.5])).unwrap() - 0.5).abs() < 1e-15);
        assert!((state_fidelity(&psi0, &dens(&[1.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        let unnorm = CVector::from_vec(vec![c(1., 0.), c(1., 0.)]);
        assert!(state_fidelity(&unnorm, &dens(&[0.5, 0.5])).is_err());
        assert!(state_fidelity(&psi0, &dens(&[0.9, 0.2])).is_err());
    }

    #[test]
    fn uj_examples() {
        let rho = dens(&[0.75, 0.25]);
        let sig = dens(&[1.0, 0.0]);
        for m in [UjMethod::Classic, UjMethod::Fast] {
            assert!((uj_fidelity(&rho, &rho, m).unwrap() - 1.0).abs() < 1e-12);
            assert!((uj_fidelity(&rho, &sig, m).unwrap() - 0.75).abs() < 1e-12);
        }
        assert!(uj_fidelity(&rho, &dens(&[1.2, -0.2]), UjMethod::Classic).is_err());
    }

    #[test]
    fn naive_overlap_of_mixed_state_with_itself() {
        let rho = dens(&[0.75, 0.25]);
        assert!((naive_overlap(&rho, &rho).unwrap() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn uj_pure_reduces_to_state_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 8] {
            let psi = random::pure_state(n, &mut rng);
            let p = Operator::hermitian_symmetrized(&psi * psi.adjoint()).unwrap();
            let s = Operator::hermitian(random::density(n, &mut rng)).unwrap();
            let sf = state_fidelity(&psi, &s).unwrap();
            for m in [UjMethod::Classic, UjMethod::Fast] {
                assert!((uj_fidelity(&p, &s, m).unwrap() - sf).abs() < 1e-10);
                assert!((uj_fidelity(&s, &p, m).unwrap() - sf).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cardinal_examples() {
        let id = Operator::identity(2).unwrap();
        assert!((cardinal_average_fidelity(&id, &id).unwrap() - 1.0).abs() < 1e-15);
        assert!((cardinal_average_fidelity(&id, &z_gate()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let ph = Operator::unitary(x_gate().matrix() * Complex64::from_polar(1.0, 1.1)).unwrap();
        assert!((cardinal_average_fidelity(&x_gate(), &ph).unwrap() - 1.0).abs() < 1e-12);
        assert!(cardinal_average_fidelity(&Operator::identity(4).unwrap(), &Operator::identity(4).unwrap()).is_err());
    }

    #[test]
    fn ensemble_single_member_is_plain_fidelity() {
        let s = SpinSystem::homonuclear("1H", &[50.0], []).unwrap();
        let p = PulseProgram::new(
            1e-5,
            2,
            vec![crate::prop::ChannelProgram {
                species: "1H".into(),
                controls: crate::prop::ChannelControls::Xy(vec![[1e4, 0.0], [0.0, 2e4]]),
            }],
        )
        .unwrap();
        let m = crate::prop::EnsembleMember::nominal();
        let v = crate::prop::sequence_propagator(&s, &p, &m).unwrap();
        let x = x_gate();
        let e = ensemble_fidelity(&s, &p, &x, &EnsembleSpec::nominal()).unwrap();
        assert!((e - unitary_fidelity(&x, &v).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn bloch_scan_peaks_at_half_polarization() {
        let rho = Operator::hermitian(diag_matrix(&[0.75, 0.25])).unwrap();
        let scan = bloch_scan(&rho, 101, UjMethod::Classic).unwrap();
        let (i, j) = scan.argmax();
        assert!((scan.r[i] - 0.5).abs() < 1e-12 && scan.theta[j] == 0.0);
        assert!((scan.at(i, j) - 1.0).abs() < 1e-12);
        let second = scan
            .fidelity
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i * 101 + j)
            .fold(0.0f64, |m, (_, v)| m.max(*v));
        assert!(second < 1.0 - 1e-6);
        assert!(bloch_state(1.2, 0.0, 0.0).is_err());
    }
}
