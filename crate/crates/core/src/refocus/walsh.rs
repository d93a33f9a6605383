//! Sequency-ordered Walsh functions.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalshPattern {
    /// Number of sign changes.
    pub index: usize,
    pub values: Vec<i8>,
}

impl WalshPattern {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sign_changes(&self) -> usize {
        self.values.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn schur(&self, other: &WalshPattern) -> Vec<i8> {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect()
    }
}

fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("Walsh length {n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// Row of the natural-order Hadamard matrix holding sequency `n`.
fn natural_row(n: usize, bits: u32) -> usize {
    let gray = n ^ (n >> 1);
    if bits == 0 {
        0
    } else {
        gray.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Sign of W_n at position `b` for length 2^bits.
pub(crate) fn walsh_sign(n: usize, b: usize, bits: u32) -> i8 {
    if (natural_row(n, bits) & b).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn walsh(n: usize, len: usize) -> Result<WalshPattern> {
    let bits = log2_exact(len)?;
    if n >= len {
        return Err(Error::InvalidArgument(format!("Walsh index {n} out of range for length {len}")));
    }
    Ok(WalshPattern {
        index: n,
        values: (0..len).map(|b| walsh_sign(n, b, bits)).collect(),
    })
}

/// Index of W_m ∘ W_n, checked elementwise on the smallest common length.
pub fn walsh_product(m: usize, n: usize) -> Result<usize> {
    let k = m ^ n;
    let len = (m.max(n) + 1).next_power_of_two().max(1);
    let (wm, wn, wk) = (walsh(m, len)?, walsh(n, len)?, walsh(k, len)?);
    if wm.schur(&wn) != wk.values {
        return Err(Error::Internal(format!("Schur product of W{m} and W{n} is not W{k}")));
    }
    Ok(k)
}

/// Spin k carries W_{2^k} on 2^q bins.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternAssignment {
    pub indices: Vec<usize>,
    /// One ±1 row per spin, one column per time bin.
    pub patterns: Vec<Vec<i8>>,
}

impl PatternAssignment {
    pub fn n_spins(&self) -> usize {
        self.indices.len()
    }

    pub fn n_bins(&self) -> usize {
        self.patterns.first().map_or(0, Vec::len)
    }

    pub fn coupling_index(&self, i: usize, j: usize) -> usize {
        self.indices[i] ^ self.indices[j]
    }

    pub fn coupling_pattern(&self, i: usize, j: usize) -> Vec<i8> {
        self.patterns[i].iter().zip(&self.patterns[j]).map(|(a, b)| a * b).collect()
    }

    /// Reorders the bins; `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_bins()];
        if perm.len() != self.n_bins() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("bin permutation is not a permutation".into()));
        }
        Ok(Self {
            indices: self.indices.clone(),
            patterns: self
                .patterns
                .iter()
                .map(|row| perm.iter().map(|&p| row[p]).collect())
                .collect(),
        })
    }
}

pub fn assign_patterns(q: usize) -> Result<PatternAssignment> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("pattern assignment needs at least 2 spins, got {q}")));
    }
    if q > 16 {
        return Err(Error::SpinCount(q));
    }
    let len = 1usize << q;
    let indices: Vec<usize> = (0..q).map(|k| 1 << k).collect();
    let patterns = indices
        .iter()
        .map(|&n| walsh(n, len).map(|w| w.values))
        .collect::<Result<_>>()?;
    Ok(PatternAssignment { indices, patterns })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_four_rows() {
        assert_eq!(walsh(0, 4).unwrap().values, vec![1, 1, 1, 1]);
        assert_eq!(walsh(1, 4).unwrap().values, vec![1, 1, -1, -1]);
        assert_eq!(walsh(2, 4).unwrap().values, vec![1, -1, -1, 1]);
        assert_eq!(walsh(3, 4).unwrap().values, vec![1, -1, 1, -1]);
    }

    #[test]
    fn sign_changes_match_index() {
        for len in [1, 2, 8, 64] {
            for n in 0..len {
                let w = walsh(n, len).unwrap();
                assert_eq!(w.sign_changes(), n);
                if n > 0 {
                    assert_eq!(w.values.iter().map(|&v| v as i32).sum::<i32>(), 0);
                }
            }
        }
    }

    #[test]
    fn errors() {
        assert!(walsh(4, 4).is_err());
        assert!(walsh(0, 6).is_err());
        assert!(assign_patterns(1).is_err());
    }

    #[test]
    fn product_examples() {
        assert_eq!(walsh_product(2, 3).unwrap(), 1);
        assert_eq!(walsh_product(5, 5).unwrap(), 0);
        assert_eq!(walsh_product(0, 6).unwrap(), 6);
    }

    #[test]
    fn assignment_indices_are_distinct() {
        for q in 2..=5 {
            let a = assign_patterns(q).unwrap();
            let mut all = a.indices.clone();
            for i in 0..q {
                for j in i + 1..q {
                    all.push(a.coupling_index(i, j));
                }
            }
            let n = all.len();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), n);
            assert!(all.iter().all(|&k| k != 0));
        }
        let a3 = assign_patterns(3).unwrap();
        assert_eq!(a3.indices, vec![1, 2, 4]);
        assert_eq!([a3.coupling_index(0, 1), a3.coupling_index(0, 2), a3.coupling_index(1, 2)], [3, 5, 6]);
    }
}
