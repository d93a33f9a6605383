//! Spin systems, product operators, drift Hamiltonians and passive-spin ensembles.
//!
//! Conventions: spin 0 is the leftmost tensor factor; |0⟩ has m = +½, so
//! `Iz = diag(½, −½)`. Offsets and couplings are stored in Hz, Hamiltonians are
//! returned in rad/s. Indices in this API are 0-based.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ZERO};
use crate::operator::{OpKind, Operator};

pub const MAX_SPINS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct Spin {
    pub label: String,
    pub species: String,
    pub offset_hz: f64,
}

impl Spin {
    pub fn new(label: impl Into<String>, species: impl Into<String>, offset_hz: f64) -> Self {
        Self {
            label: label.into(),
            species: species.into(),
            offset_hz,
        }
    }
}

/// All spins of one species, driven by a common RF channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub species: String,
    pub spins: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    spins: Vec<Spin>,
    couplings: BTreeMap<(usize, usize), f64>,
    channels: Vec<Channel>,
}

impl SpinSystem {
    /// Couplings are given once per unordered pair; `(i, j)` and `(j, i)` both count as that pair.
    pub fn new(
        spins: Vec<Spin>,
        couplings: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        let q = spins.len();
        if q == 0 || q > MAX_SPINS {
            return Err(Error::SpinCount(q));
        }
        for s in &spins {
            if !s.offset_hz.is_finite() {
                return Err(Error::InvalidSystem(format!(
                    "offset of spin {} is not finite",
                    s.label
                )));
            }
        }
        let mut map = BTreeMap::new();
        for ((i, j), jhz) in couplings {
            for idx in [i, j] {
                if idx >= q {
                    return Err(Error::SpinIndex {
                        index: idx,
                        count: q,
                    });
                }
            }
            if i == j {
                return Err(Error::InvalidSystem(format!("self-coupling on spin {i}")));
            }
            if !jhz.is_finite() {
                return Err(Error::InvalidSystem(format!(
                    "coupling ({i},{j}) is not finite"
                )));
            }
            let key = (i.min(j), i.max(j));
            if map.insert(key, jhz).is_some() {
                return Err(Error::InvalidSystem(format!(
                    "duplicate coupling ({},{})",
                    key.0, key.1
                )));
            }
        }
        let mut channels: Vec<Channel> = Vec::new();
        for (k, s) in spins.iter().enumerate() {
            match channels.iter_mut().find(|ch| ch.species == s.species) {
                Some(ch) => ch.spins.push(k),
                None => channels.push(Channel {
                    species: s.species.clone(),
                    spins: vec![k],
                }),
            }
        }
        Ok(Self {
            spins,
            couplings: map,
            channels,
        })
    }

    /// All spins share `species`; labels are `species` followed by the 1-based index.
    pub fn homonuclear(
        species: &str,
        offsets_hz: &[f64],
        couplings: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        let spins = offsets_hz
            .iter()
            .enumerate()
            .map(|(k, &o)| Spin::new(format!("{species}{}", k + 1), species, o))
            .collect();
        Self::new(spins, couplings)
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.spins.len()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn spin(&self, k: usize) -> Result<&Spin> {
        self.spins.get(k).ok_or(Error::SpinIndex {
            index: k,
            count: self.len(),
        })
    }

    /// Stored couplings, keyed by `(i, j)` with `i < j`.
    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    /// J in Hz, zero for uncoupled pairs.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, species: &str) -> Result<&Channel> {
        self.channels
            .iter()
            .find(|ch| ch.species == species)
            .ok_or_else(|| Error::UnknownChannel(species.to_string()))
    }

    pub fn is_homonuclear(&self) -> bool {
        self.channels.len() == 1
    }

    /// Copy with each offset shifted by `shifts_hz[k]`.
    pub fn with_offset_shifts(&self, shifts_hz: &[f64]) -> Result<Self> {
        if shifts_hz.len() != self.len() {
            return Err(Error::DimensionMismatch(shifts_hz.len(), self.len()));
        }
        let mut out = self.clone();
        for (s, d) in out.spins.iter_mut().zip(shifts_hz) {
            s.offset_hz += d;
        }
        Ok(out)
    }
}

#[inline]
pub(crate) fn spin_mask(q: usize, k: usize) -> usize {
    1 << (q - 1 - k)
}

/// ±½ eigenvalue of I_z^k on each computational basis state.
pub fn iz_diagonal(q: usize, k: usize) -> Vec<f64> {
    let mask = spin_mask(q, k);
    (0..1usize << q)
        .map(|r| if r & mask == 0 { 0.5 } else { -0.5 })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Embedded single-spin operator as a raw matrix.
pub fn spin_op_matrix(q: usize, k: usize, axis: Axis) -> CMatrix {
    let n = 1usize << q;
    let mask = spin_mask(q, k);
    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        let up = r & mask == 0;
        match axis {
            Axis::X => m[(r, r ^ mask)] = c(0.5, 0.0),
            Axis::Y => m[(r, r ^ mask)] = if up { c(0.0, -0.5) } else { c(0.0, 0.5) },
            Axis::Z => m[(r, r)] = c(if up { 0.5 } else { -0.5 }, 0.0),
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinOps {
    pub ix: Operator,
    pub iy: Operator,
    pub iz: Operator,
}

pub fn single_spin_ops(q: usize, k: usize) -> Result<SpinOps> {
    if q == 0 || q > MAX_SPINS {
        return Err(Error::SpinCount(q));
    }
    if k >= q {
        return Err(Error::SpinIndex { index: k, count: q });
    }
    let op = |a| Operator::from_parts(spin_op_matrix(q, k, a), OpKind::Hermitian);
    Ok(SpinOps {
        ix: op(Axis::X),
        iy: op(Axis::Y),
        iz: op(Axis::Z),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TotalOps {
    pub fx: Operator,
    pub fy: Operator,
    pub fz: Operator,
}

fn channel_sum(q: usize, spins: &[usize], axis: Axis) -> CMatrix {
    let n = 1usize << q;
    spins
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, &k| acc + spin_op_matrix(q, k, axis))
}

/// F_z diagonal for a channel.
pub(crate) fn channel_fz_diagonal(q: usize, spins: &[usize]) -> Vec<f64> {
    let mut d = vec![0.0; 1 << q];
    for &k in spins {
        for (x, z) in d.iter_mut().zip(iz_diagonal(q, k)) {
            *x += z;
        }
    }
    d
}

pub fn total_ops(system: &SpinSystem, species: &str) -> Result<TotalOps> {
    let ch = system.channel(species)?;
    let q = system.len();
    let op = |a| Operator::from_parts(channel_sum(q, &ch.spins, a), OpKind::Hermitian);
    Ok(TotalOps {
        fx: op(Axis::X),
        fy: op(Axis::Y),
        fz: op(Axis::Z),
    })
}

pub(crate) fn total_xy_matrices(system: &SpinSystem, species: &str) -> Result<(CMatrix, CMatrix)> {
    let ch = system.channel(species)?;
    let q = system.len();
    Ok((channel_sum(q, &ch.spins, Axis::X), channel_sum(q, &ch.spins, Axis::Y)))
}

/// Diagonal of H0 in rad/s.
pub fn drift_diagonal(system: &SpinSystem) -> Vec<f64> {
    let q = system.len();
    let zs: Vec<Vec<f64>> = (0..q).map(|k| iz_diagonal(q, k)).collect();
    let mut d = vec![0.0; 1 << q];
    for (k, s) in system.spins().iter().enumerate() {
        let w = 2.0 * std::f64::consts::PI * s.offset_hz;
        for (x, z) in d.iter_mut().zip(&zs[k]) {
            *x += w * z;
        }
    }
    for (&(i, j), &jhz) in system.couplings() {
        let w = std::f64::consts::PI * jhz * 2.0;
        for (r, x) in d.iter_mut().enumerate() {
            *x += w * zs[i][r] * zs[j][r];
        }
    }
    d
}

/// H0 = Σ 2πν_k I_z^k + Σ πJ_kl 2 I_z^k I_z^l (rad/s).
pub fn drift_hamiltonian(system: &SpinSystem) -> Operator {
    let d = drift_diagonal(system);
    Operator::from_parts(crate::linalg::diag_matrix(&d), OpKind::Hermitian)
}

/// Keeps the listed spins (sorted, deduplicated) and every coupling among them.
pub fn subsystem(system: &SpinSystem, keep: &[usize]) -> Result<SpinSystem> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("subsystem keep set is empty".into()));
    }
    let mut idx: Vec<usize> = keep.to_vec();
    idx.sort_unstable();
    idx.dedup();
    for &k in &idx {
        system.spin(k)?;
    }
    let spins = idx.iter().map(|&k| system.spins[k].clone()).collect();
    let pos = |k: usize| idx.iter().position(|&x| x == k);
    let couplings = system
        .couplings
        .iter()
        .filter_map(|(&(i, j), &v)| Some(((pos(i)?, pos(j)?), v)))
        .collect::<Vec<_>>();
    SpinSystem::new(spins, couplings)
}

/// One member of a passive-spin ensemble: the active subsystem seen by one
/// (class of) passive computational states.
#[derive(Clone, Debug, PartialEq)]
pub struct PassiveMember {
    /// Active subsystem with passive couplings folded into its offsets.
    pub system: SpinSystem,
    pub drift: Operator,
    /// Offset shift per active spin, Hz.
    pub offset_shift_hz: Vec<f64>,
    /// Number of passive spins in |1⟩ for each passive unit (singleton or group).
    pub passive_excitations: Vec<usize>,
    pub weight: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Enumerates passive-spin states. Each passive spin p in |0⟩ shifts active
/// spin a by +J(a,p)/2 Hz, in |1⟩ by −J(a,p)/2. Spins listed together in
/// `equivalent` are indistinguishable and collapse to one member per
/// excitation count, weighted by its multiplicity.
pub fn passive_ensemble(
    system: &SpinSystem,
    active: &[usize],
    passive: &[usize],
    equivalent: &[Vec<usize>],
) -> Result<Vec<PassiveMember>> {
    let q = system.len();
    let mut seen = vec![false; q];
    for &k in active.iter().chain(passive) {
        system.spin(k)?;
        if seen[k] {
            return Err(Error::InvalidArgument(format!(
                "spin {k} listed more than once in active/passive sets"
            )));
        }
        seen[k] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidArgument(
            "active and passive sets must cover every spin".into(),
        ));
    }
    if active.is_empty() {
        return Err(Error::InvalidArgument("active set is empty".into()));
    }
    let mut active_sorted = active.to_vec();
    active_sorted.sort_unstable();
    let base = subsystem(system, &active_sorted)?;

    let mut grouped = vec![false; q];
    let mut units: Vec<Vec<usize>> = Vec::new();
    for g in equivalent {
        if g.is_empty() {
            continue;
        }
        for &p in g {
            if !passive.contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "equivalence group member {p} is not passive"
                )));
            }
            if grouped[p] {
                return Err(Error::InvalidArgument(format!(
                    "spin {p} appears in two equivalence groups"
                )));
            }
            grouped[p] = true;
        }
        for &a in &active_sorted {
            let j0 = system.coupling(a, g[0]);
            if g.iter().any(|&p| (system.coupling(a, p) - j0).abs() > 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "equivalence group {g:?} has unequal couplings to active spin {a}"
                )));
            }
        }
        units.push(g.clone());
    }
    let mut singles: Vec<usize> = passive.iter().copied().filter(|&p| !grouped[p]).collect();
    singles.sort_unstable();
    let mut all_units: Vec<Vec<usize>> = singles.into_iter().map(|p| vec![p]).collect();
    all_units.extend(units);
    all_units.sort_by_key(|u| u[0]);

    let total_states = 2f64.powi(passive.len() as i32);
    let radices: Vec<usize> = all_units.iter().map(|u| u.len() + 1).collect();
    let count: usize = radices.iter().product();
    let mut members = Vec::with_capacity(count);
    for mut code in 0..count {
        let mut exc = vec![0usize; all_units.len()];
        for u in (0..all_units.len()).rev() {
            exc[u] = code % radices[u];
            code /= radices[u];
        }
        let mut shift = vec![0.0; active_sorted.len()];
        let mut mult = 1.0;
        for (u, unit) in all_units.iter().enumerate() {
            let g = unit.len();
            let up = (g - exc[u]) as f64;
            let down = exc[u] as f64;
            mult *= binomial(g, exc[u]);
            for (ai, &a) in active_sorted.iter().enumerate() {
                let j = system.coupling(a, unit[0]);
                shift[ai] += 0.5 * j * (up - down);
            }
        }
        let sys = base.with_offset_shifts(&shift)?;
        let drift = drift_hamiltonian(&sys);
        members.push(PassiveMember {
            system: sys,
            drift,
            offset_shift_hz: shift,
            passive_excitations: exc,
            weight: mult / total_states,
        });
    }
    Ok(members)
}

/// Per-species coherence orders of every density-matrix element, counting each spin as ±1.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceOrderTable {
    pub species: Vec<String>,
    dim: usize,
    orders: Vec<Vec<i32>>,
}

impl CoherenceOrderTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self, species_index: usize, r: usize, c: usize) -> i32 {
        self.orders[species_index][r * self.dim + c]
    }

    /// Total order summed over species.
    pub fn total_order(&self, r: usize, c: usize) -> i32 {
        (0..self.species.len()).map(|s| self.order(s, r, c)).sum()
    }

    /// True iff every per-species order vanishes.
    pub fn survives_crush(&self, r: usize, c: usize) -> bool {
        (0..self.species.len()).all(|s| self.order(s, r, c) == 0)
    }
}

pub fn coherence_orders(system: &SpinSystem) -> CoherenceOrderTable {
    let q = system.len();
    let n = system.dim();
    let mut orders = Vec::new();
    let mut species = Vec::new();
    for ch in system.channels() {
        species.push(ch.species.clone());
        let m: Vec<i32> = (0..n)
            .map(|r| {
                ch.spins
                    .iter()
                    .map(|&k| if r & spin_mask(q, k) == 0 { 1 } else { -1 })
                    .sum()
            })
            .collect();
        let mut o = vec![0i32; n * n];
        for r in 0..n {
            for cc in 0..n {
                o[r * n + cc] = (m[r] - m[cc]) / 2;
            }
        }
        orders.push(o);
    }
    CoherenceOrderTable {
        species,
        dim: n,
        orders,
    }
}

/// Zeroes every element that does not survive a gradient crush.
pub(crate) fn crush_matrix(m: &CMatrix, table: &CoherenceOrderTable) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for r in 0..n {
        for cc in 0..n {
            if !table.survives_crush(r, cc) {
                out[(r, cc)] = ZERO;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, max_abs_diff, trace, I};

    fn hetero() -> SpinSystem {
        SpinSystem::new(
            vec![Spin::new("H", "1H", 0.0), Spin::new("C", "13C", 0.0)],
            [((0, 1), 200.0)],
        )
        .unwrap()
    }

    #[test]
    fn single_spin_iz() {
        let ops = single_spin_ops(1, 0).unwrap();
        assert_eq!(ops.iz.matrix(), &crate::linalg::diag_matrix(&[0.5, -0.5]));
    }

    #[test]
    fn two_spin_traces() {
        let iz = single_spin_ops(2, 0).unwrap().iz;
        assert_eq!(trace(iz.matrix()).norm(), 0.0);
        assert!((trace(&(iz.matrix() * iz.matrix())).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distinct_spins_commute() {
        let a = single_spin_ops(2, 0).unwrap();
        let b = single_spin_ops(2, 1).unwrap();
        assert_eq!(max_abs(&commutator(a.ix.matrix(), b.iy.matrix())), 0.0);
    }

    #[test]
    fn angular_momentum_algebra() {
        for q in 1..=3 {
            for k in 0..q {
                let o = single_spin_ops(q, k).unwrap();
                let (x, y, z) = (o.ix.matrix(), o.iy.matrix(), o.iz.matrix());
                assert!(max_abs_diff(&commutator(x, y), &(z * I)) < 1e-12);
                assert!(max_abs_diff(&commutator(y, z), &(x * I)) < 1e-12);
                assert!(max_abs_diff(&commutator(z, x), &(y * I)) < 1e-12);
            }
        }
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(
            single_spin_ops(2, 2),
            Err(Error::SpinIndex { index: 2, count: 2 })
        ));
    }

    #[test]
    fn total_ops_homonuclear_is_sum() {
        let s = SpinSystem::homonuclear("1H", &[0.0, 0.0], []).unwrap();
        let t = total_ops(&s, "1H").unwrap();
        let sum = single_spin_ops(2, 0).unwrap().ix.into_matrix()
            + single_spin_ops(2, 1).unwrap().ix.into_matrix();
        assert_eq!(t.fx.matrix(), &sum);
    }

    #[test]
    fn total_ops_heteronuclear_channel() {
        let t = total_ops(&hetero(), "13C").unwrap();
        let sx = crate::linalg::CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
        );
        let expect = crate::linalg::kron(&crate::linalg::identity(2), &sx);
        assert_eq!(t.fx.matrix(), &expect);
        assert!(matches!(total_ops(&hetero(), "15N"), Err(Error::UnknownChannel(_))));
    }

    #[test]
    fn drift_single_spin_eigenvalues() {
        let s = SpinSystem::homonuclear("1H", &[100.0], []).unwrap();
        let d = drift_diagonal(&s);
        let pi = std::f64::consts::PI;
        assert!((d[0] - 100.0 * pi).abs() < 1e-12 && (d[1] + 100.0 * pi).abs() < 1e-12);
        let z = SpinSystem::homonuclear("1H", &[0.0], []).unwrap();
        assert_eq!(drift_diagonal(&z), vec![0.0, 0.0]);
    }

    #[test]
    fn couple_delay_converts_inphase_to_antiphase() {
        // exp(−iH0/(2J)) Ix exp(+iH0/(2J)) = 2 Iy Sz for H0 = πJ 2IzSz.
        let s = SpinSystem::homonuclear("1H", &[0.0, 0.0], [((0, 1), 100.0)]).unwrap();
        let u = crate::linalg::expm_hermitian(drift_hamiltonian(&s).matrix(), 1.0 / 200.0);
        let ix = spin_op_matrix(2, 0, Axis::X);
        let out = &u * ix * u.adjoint();
        let expect = spin_op_matrix(2, 0, Axis::Y) * spin_op_matrix(2, 1, Axis::Z) * c(2.0, 0.0);
        assert!(max_abs_diff(&out, &expect) < 1e-12);
    }

    #[test]
    fn subsystem_keep_all_round_trips() {
        let s = SpinSystem::homonuclear(
            "1H",
            &[10.0, 20.0, 30.0, 40.0],
            [((0, 1), 5.0), ((1, 2), 6.0), ((2, 3), 7.0), ((0, 2), 1.0)],
        )
        .unwrap();
        assert_eq!(subsystem(&s, &[0, 1, 2, 3]).unwrap(), s);
        let sub = subsystem(&s, &[0, 1, 2]).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.couplings().len(), 3);
        assert_eq!(sub.coupling(0, 2), 1.0);
        let one = subsystem(&s, &[0]).unwrap();
        assert!(one.couplings().is_empty());
        assert!(subsystem(&s, &[]).is_err());
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(SpinSystem::homonuclear("1H", &[0.0; 13], []).is_err());
        assert!(SpinSystem::homonuclear("1H", &[0.0; 2], [((0, 0), 1.0)]).is_err());
        assert!(SpinSystem::homonuclear("1H", &[0.0; 2], [((0, 1), 1.0), ((1, 0), 2.0)]).is_err());
        assert!(SpinSystem::homonuclear("1H", &[0.0; 2], [((0, 2), 1.0)]).is_err());
    }

    #[test]
    fn passive_ensemble_counts_and_weights() {
        let mut spins = vec![Spin::new("C1", "13C", 0.0), Spin::new("C2", "13C", 50.0)];
        for k in 0..5 {
            spins.push(Spin::new(format!("H{k}"), "1H", 0.0));
        }
        let coup = [
            ((0, 2), 140.0),
            ((0, 3), 7.0),
            ((1, 4), 130.0),
            ((1, 5), 130.0),
            ((1, 6), 130.0),
        ];
        let s = SpinSystem::new(spins, coup).unwrap();
        let all = passive_ensemble(&s, &[0, 1], &[2, 3, 4, 5, 6], &[]).unwrap();
        assert_eq!(all.len(), 32);
        assert!(all.iter().all(|m| (m.weight - 1.0 / 32.0).abs() < 1e-15));
        let grouped = passive_ensemble(&s, &[0, 1], &[2, 3, 4, 5, 6], &[vec![4, 5, 6]]).unwrap();
        assert_eq!(grouped.len(), 16);
        let w: f64 = grouped.iter().map(|m| m.weight).sum();
        assert!((w - 1.0).abs() < 1e-12);
        let none = passive_ensemble(&s, &[0, 1, 2, 3, 4, 5, 6], &[], &[]).unwrap();
        assert_eq!(none.len(), 1);
        assert_eq!(none[0].weight, 1.0);
        assert!(passive_ensemble(&s, &[0, 1, 2], &[2, 3, 4, 5, 6], &[]).is_err());
    }

    #[test]
    fn passive_ensemble_matches_full_drift_block() {
        // Each member's drift equals the diagonal block of the full H0 (up to a
        // passive-only constant) at the corresponding passive state.
        let s = SpinSystem::homonuclear("X", &[30.0, -70.0, 11.0], [((0, 2), 40.0), ((1, 2), -25.0), ((0, 1), 9.0)])
            .unwrap();
        let full = drift_diagonal(&s);
        let members = passive_ensemble(&s, &[0, 1], &[2], &[]).unwrap();
        for (pstate, m) in members.iter().enumerate() {
            let d = drift_diagonal(&m.system);
            let block: Vec<f64> = (0..4).map(|a| full[a * 2 + pstate]).collect();
            let off = block[0] - d[0];
            for a in 0..4 {
                assert!((block[a] - d[a] - off).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coherence_order_examples() {
        let one = coherence_orders(&SpinSystem::homonuclear("1H", &[0.0], []).unwrap());
        assert_eq!(one.order(0, 0, 1), 1);
        let homo = coherence_orders(&SpinSystem::homonuclear("1H", &[0.0, 0.0], []).unwrap());
        assert_eq!(homo.order(0, 0b01, 0b10), 0);
        let het = coherence_orders(&hetero());
        assert_eq!(het.order(0, 0b01, 0b10), 1);
        assert_eq!(het.order(1, 0b01, 0b10), -1);
        assert!(!het.survives_crush(0b01, 0b10));
    }
}
