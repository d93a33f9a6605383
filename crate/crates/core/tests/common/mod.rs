#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spinforge::linalg::{self, CMatrix};
use spinforge::{Operator, Spin, SpinSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_homonuclear(q: usize, rng: &mut ChaCha8Rng) -> SpinSystem {
    let offsets: Vec<f64> = (0..q).map(|_| rng.random_range(-2000.0..2000.0)).collect();
    let mut coup = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            coup.push(((i, j), rng.random_range(-150.0..150.0)));
        }
    }
    SpinSystem::homonuclear("1H", &offsets, coup).unwrap()
}

pub fn heteronuclear_pair(j_hz: f64) -> SpinSystem {
    SpinSystem::new(
        vec![Spin::new("H1", "1H", 0.0), Spin::new("C1", "13C", 0.0)],
        [((0, 1), j_hz)],
    )
    .unwrap()
}

pub fn random_target(dim: usize, rng: &mut ChaCha8Rng) -> Operator {
    Operator::unitary(linalg::random::unitary(dim, rng)).unwrap()
}

pub fn normwise_rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

pub fn x_gate() -> CMatrix {
    let o = linalg::c(0.0, 0.0);
    let l = linalg::c(1.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
