//! Dense two-phase primal simplex for min cᵀx, Ax = b, x ≥ 0.

use crate::error::{Error, Result};

pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct EqualityLp {
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Names used when reporting infeasibility.
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    /// m constraint rows then the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.t[r][col];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Bland's rule on columns `0..n_cols`. Returns false if unbounded.
    fn run(&mut self, n_cols: usize) -> bool {
        let m = self.m();
        let rhs = self.t[0].len() - 1;
        loop {
            let Some(col) = (0..n_cols).find(|&j| self.t[m][j] < -FEASIBILITY_TOL) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..m {
                let a = self.t[r][col];
                if a > FEASIBILITY_TOL {
                    let ratio = self.t[r][rhs] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - FEASIBILITY_TOL || ((ratio - br).abs() <= FEASIBILITY_TOL && self.basis[r] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

impl EqualityLp {
    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.cost.len();
        let m = self.rows.len();
        if self.rhs.len() != m || self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("linear program has inconsistent shapes".into()));
        }
        let label = |i: usize| self.labels.get(i).cloned().unwrap_or_else(|| format!("row {i}"));

        // Phase 1 with one artificial per row.
        let width = n + m + 1;
        let mut t = Vec::with_capacity(m + 1);
        for (i, (row, &b)) in self.rows.iter().zip(&self.rhs).enumerate() {
            let s = if b < 0.0 { -1.0 } else { 1.0 };
            let mut r = vec![0.0; width];
            for (dst, &a) in r.iter_mut().zip(row) {
                *dst = s * a;
            }
            r[n + i] = 1.0;
            r[width - 1] = s * b;
            t.push(r);
        }
        let mut obj = vec![0.0; width];
        for r in &t {
            for j in 0..n {
                obj[j] -= r[j];
            }
            obj[width - 1] -= r[width - 1];
        }
        t.push(obj);
        let mut tab = Tableau {
            t,
            basis: (n..n + m).collect(),
            pivots: 0,
        };
        tab.run(n + m);
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if -tab.t[m][width - 1] > FEASIBILITY_TOL * scale {
            let worst = (0..m)
                .filter(|&r| tab.basis[r] >= n)
                .max_by(|&a, &b| tab.t[a][width - 1].total_cmp(&tab.t[b][width - 1]))
                .map(|r| tab.basis[r] - n)
                .unwrap_or(0);
            return Err(Error::Infeasible(format!(
                "constraint {} cannot be met (residual {:.3e})",
                label(worst),
                -tab.t[m][width - 1]
            )));
        }

        // Drive artificials out of the basis; rows that cannot be are redundant.
        let mut r = 0;
        while r < tab.m() {
            if tab.basis[r] >= n {
                match (0..n).find(|&j| tab.t[r][j].abs() > FEASIBILITY_TOL) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        // Phase 2 on the original columns only.
        let m2 = tab.m();
        let mut obj = vec![0.0; width];
        obj[..n].copy_from_slice(&self.cost);
        for (row, &bj) in tab.t[..m2].iter().zip(&tab.basis) {
            let cb = self.cost[bj];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
        for j in n..n + m {
            obj[j] = 0.0;
        }
        tab.t[m2] = obj;
        tab.t.truncate(m2 + 1);
        if !tab.run(n) {
            return Err(Error::Infeasible("objective is unbounded below".into()));
        }
        let mut x = vec![0.0; n];
        for (row, &bj) in tab.t[..m2].iter().zip(&tab.basis) {
            x[bj] = row[width - 1].max(0.0);
        }
        let objective = x.iter().zip(&self.cost).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            pivots: tab.pivots,
        })
    }
}
