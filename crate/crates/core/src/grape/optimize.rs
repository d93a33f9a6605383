use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GrapeProblem, OptimizerKind};
use crate::error::Result;
use crate::prop::PulseProgram;

const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Goal,
    GradientTolerance,
    LineSearchFailure,
    IterationCap,
}

#[derive(Clone, Debug)]
pub struct GrapeResult {
    pub params: Vec<f64>,
    pub program: PulseProgram,
    pub fidelity: f64,
    /// Objective after every accepted step of the reported attempt, starting with the initial value.
    pub trace: Vec<f64>,
    /// Iterations of the reported attempt.
    pub iterations: usize,
    /// Iterations summed over all attempts.
    pub total_iterations: usize,
    pub attempts: usize,
    pub converged: bool,
    pub stop: StopReason,
}

struct Attempt {
    x: Vec<f64>,
    f: f64,
    fidelity: f64,
    trace: Vec<f64>,
    iterations: usize,
    stop: StopReason,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Dense inverse-Hessian approximation for minimizing −F.
struct Bfgs {
    n: usize,
    h: Vec<f64>,
    fresh: bool,
}

impl Bfgs {
    fn new(n: usize) -> Self {
        let mut b = Self {
            n,
            h: vec![0.0; n * n],
            fresh: true,
        };
        b.reset();
        b
    }

    fn reset(&mut self) {
        self.h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            self.h[i * self.n + i] = 1.0;
        }
        self.fresh = true;
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(&self.h[i * self.n..(i + 1) * self.n], g)).collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let sy = dot(s, y);
        let yy = dot(y, y);
        if !(sy > 1e-12 * dot(s, s).sqrt() * yy.sqrt()) {
            return;
        }
        if self.fresh {
            let g = sy / yy;
            self.h.iter_mut().for_each(|v| *v *= g);
            self.fresh = false;
        }
        let n = self.n;
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        let rho = 1.0 / sy;
        let k = rho * rho * yhy + rho;
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + k * s[i] * s[j];
            }
        }
    }
}

fn run_attempt(problem: &GrapeProblem, x0: Vec<f64>) -> Result<Attempt> {
    let opts = &problem.options;
    let trust = problem.trust();
    let n = problem.n_params();
    let mut x = x0;
    problem.project(&mut x);
    let (mut f, mut g) = problem.objective_and_gradient(&x)?;
    let mut fid = problem.fidelity(&x)?;
    let mut trace = vec![f];
    let mut bfgs = Bfgs::new(n);
    let mut iterations = 0;
    let stop = loop {
        if 1.0 - fid <= opts.goal_infidelity {
            break StopReason::Goal;
        }
        if inf_norm(&g) <= opts.grad_tol {
            break StopReason::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break StopReason::IterationCap;
        }
        let mut d = match opts.optimizer {
            OptimizerKind::SteepestAscent => g.clone(),
            OptimizerKind::QuasiNewton => bfgs.apply(&g),
        };
        if dot(&g, &d) <= 0.0 {
            bfgs.reset();
            d = g.clone();
        }
        let dn = inf_norm(&d);
        let mut alpha = match opts.optimizer {
            OptimizerKind::SteepestAscent => trust / dn,
            OptimizerKind::QuasiNewton if bfgs.fresh => trust / dn,
            OptimizerKind::QuasiNewton => (trust / dn).min(1.0),
        };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            problem.project(&mut xt);
            let step: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            let predicted = dot(&g, &step);
            if predicted > 0.0 {
                let ft = problem.objective(&xt)?;
                if ft >= f + ARMIJO_C1 * predicted {
                    accepted = Some((xt, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((xn, _)) = accepted else {
            if !bfgs.fresh {
                bfgs.reset();
                continue;
            }
            break StopReason::LineSearchFailure;
        };
        let (fnew, gn) = problem.objective_and_gradient(&xn)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        if opts.optimizer == OptimizerKind::QuasiNewton {
            bfgs.update(&s, &y);
        }
        x = xn;
        f = fnew;
        g = gn;
        fid = problem.fidelity(&x)?;
        trace.push(f);
        iterations += 1;
    };
    Ok(Attempt {
        x,
        f,
        fidelity: fid,
        trace,
        iterations,
        stop,
    })
}

/// Maximizes the objective from random starts, restarting whenever an attempt
/// stalls short of the goal. Restart r draws from ChaCha stream r of the seed.
pub fn optimize(problem: &GrapeProblem) -> Result<GrapeResult> {
    optimize_inner(problem, None)
}

/// As [`optimize`], with the first attempt starting from `x0`.
pub fn optimize_from(problem: &GrapeProblem, x0: Vec<f64>) -> Result<GrapeResult> {
    if x0.len() != problem.n_params() {
        return Err(crate::Error::DimensionMismatch(x0.len(), problem.n_params()));
    }
    optimize_inner(problem, Some(x0))
}

fn optimize_inner(problem: &GrapeProblem, x0: Option<Vec<f64>>) -> Result<GrapeResult> {
    let mut best: Option<Attempt> = None;
    let mut total = 0;
    let mut attempts = 0;
    let mut first = x0;
    for r in 0..=problem.options.restarts {
        let start = match first.take() {
            Some(x) => x,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(problem.options.seed);
                rng.set_stream(r as u64);
                problem.initial_params(&mut rng)
            }
        };
        let a = run_attempt(problem, start)?;
        total += a.iterations;
        attempts += 1;
        let done = a.stop == StopReason::Goal;
        if best.as_ref().is_none_or(|b| a.f > b.f) {
            best = Some(a);
        }
        if done {
            break;
        }
    }
    let b = best.expect("at least one attempt");
    Ok(GrapeResult {
        program: problem.program(&b.x)?,
        params: b.x,
        fidelity: b.fidelity,
        trace: b.trace,
        iterations: b.iterations,
        total_iterations: total,
        attempts,
        converged: b.stop == StopReason::Goal,
        stop: b.stop,
    })
}
