use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AnisoBox, DENSE_CELL_BUDGET};
use crate::rational;

/// The finite group `Z/T_1 x ... x Z/T_k` on which transforms of functions
/// supported in a box are computed exactly.
///
/// Cycle lengths are powers of two with `T_j >= 2 M^j + 1`, which rules out
/// wraparound for correlations of functions supported in `Q_M`. When a
/// resolution `eta` is given, `T_j >= 4 eta^k M^j` as well, so every major box
/// of half width `1/(eta^k M^j)` spans at least nine lattice frequencies per
/// axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingGroup {
    k: usize,
    m: u64,
    #[serde(serialize_with = "rational::serialize_opt")]
    eta: Option<BigRational>,
    #[serde(rename = "T")]
    lengths: Vec<usize>,
}

impl EmbeddingGroup {
    pub fn for_box(b: &AnisoBox, eta: Option<&BigRational>) -> Result<Self> {
        let k = b.k();
        let mut lengths = Vec::with_capacity(k);
        for axis in 0..k {
            let side = b.side(axis) as u128;
            let mut need = 2 * side + 1;
            if let Some(eta) = eta {
                if !eta.is_positive() {
                    return Err(Error::param("eta", "must be positive"));
                }
                let bound = rational::pow(eta, k) * rational::int(4 * side as u64);
                let bound = rational::ceil_i64(&bound)?.max(1) as u128;
                need = need.max(bound);
            }
            let t = need
                .checked_next_power_of_two()
                .filter(|&t| t <= DENSE_CELL_BUDGET as u128)
                .ok_or_else(|| Error::ResourceLimit(format!("cycle length {need} too large")))?;
            lengths.push(t as usize);
        }
        let group = EmbeddingGroup {
            k,
            m: b.m(),
            eta: eta.cloned(),
            lengths,
        };
        group.size()?;
        Ok(group)
    }

    /// A group with explicit cycle lengths (any sizes, not only powers of
    /// two).
    pub fn with_lengths(m: u64, lengths: Vec<usize>) -> Result<Self> {
        if lengths.contains(&0) {
            return Err(Error::param("T", "cycle lengths must be positive"));
        }
        let group = EmbeddingGroup {
            k: lengths.len(),
            m,
            eta: None,
            lengths,
        };
        group.size()?;
        Ok(group)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn eta(&self) -> Option<&BigRational> {
        self.eta.as_ref()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// `prod_j T_j`.
    pub fn size(&self) -> Result<usize> {
        let mut n: usize = 1;
        for &t in &self.lengths {
            n = n
                .checked_mul(t)
                .filter(|&n| n <= DENSE_CELL_BUDGET)
                .ok_or_else(|| {
                    Error::ResourceLimit(format!(
                        "embedding group {:?} exceeds {} cells",
                        self.lengths, DENSE_CELL_BUDGET
                    ))
                })?;
        }
        Ok(n)
    }

    /// Row-major strides (axis 0 slowest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.k];
        for axis in (0..self.k.saturating_sub(1)).rev() {
            s[axis] = s[axis + 1] * self.lengths[axis + 1];
        }
        s
    }

    /// Flat index of the residue class of `p`.
    pub fn index_of(&self, p: &[i64]) -> usize {
        let strides = self.strides();
        p.iter()
            .zip(&self.lengths)
            .zip(&strides)
            .map(|((&x, &t), &s)| x.rem_euclid(t as i64) as usize * s)
            .sum()
    }

    /// Frequency indices `xi` of a flat index.
    pub fn frequency_indices(&self, mut idx: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0; self.k];
        for axis in 0..self.k {
            out[axis] = idx / strides[axis];
            idx %= strides[axis];
        }
        out
    }

    /// The torus point `(xi_1/T_1, ..., xi_k/T_k)`.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        self.frequency_indices(idx)
            .iter()
            .zip(&self.lengths)
            .map(|(&x, &t)| x as f64 / t as f64)
            .collect()
    }
}
