use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::PolynomialFamily;
use crate::rational;

/// Splits the rows of `P` into a maximal independent selection `R`, taken
/// greedily by row index, and the rest, with `P_dep = D R` exactly.
#[derive(Clone, Debug, Serialize)]
pub struct LiftDecomposition {
    #[serde(skip)]
    pub family: PolynomialFamily,
    pub rank: usize,
    pub selected: Vec<usize>,
    pub dependent: Vec<usize>,
    /// `(ell - r) x r`; row `i` expresses `P_dependent[i]` in the selection.
    #[serde(serialize_with = "serialize_matrix")]
    pub d_matrix: Vec<Vec<BigRational>>,
    /// Index of `R(Z^k)` in `Z^r`: the gcd of the `r x r` minors of `R`.
    pub lattice_index: u64,
}

fn serialize_matrix<S: Serializer>(
    m: &[Vec<BigRational>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m
        .iter()
        .map(|r| r.iter().map(rational::display).collect())
        .collect();
    rows.serialize(s)
}

impl LiftDecomposition {
    /// `R(b)`, the selected rows applied to `b`.
    pub fn reduced(&self, b: &[i64]) -> Vec<i128> {
        self.selected
            .iter()
            .map(|&i| dot(self.family.row(i), b))
            .collect()
    }

    /// `D v` for `v = R(b)`.
    pub fn dependent_values(&self, v: &[i128]) -> Vec<BigRational> {
        self.d_matrix
            .iter()
            .map(|row| row.iter().zip(v).map(|(c, &x)| c * rational::int(x)).sum())
            .collect()
    }

    /// The selected rows as integer vectors.
    pub fn selected_rows(&self) -> Vec<Vec<i64>> {
        self.selected
            .iter()
            .map(|&i| self.family.row(i).to_vec())
            .collect()
    }
}

pub(crate) fn dot(row: &[i64], b: &[i64]) -> i128 {
    row.iter()
        .zip(b)
        .map(|(&c, &x)| c as i128 * x as i128)
        .sum()
}

struct Pivot {
    col: usize,
    vec: Vec<BigRational>,
    comb: Vec<BigRational>,
}

pub fn decompose(p: &PolynomialFamily) -> Result<LiftDecomposition> {
    let (ell, k) = (p.ell(), p.k());
    let mut basis: Vec<Pivot> = Vec::new();
    let mut selected = Vec::new();
    let mut dependent = Vec::new();
    let mut combos: Vec<Vec<BigRational>> = Vec::new();
    for i in 0..ell {
        let mut v: Vec<BigRational> = p.row(i).iter().map(|&c| rational::int(c)).collect();
        let mut comb = vec![BigRational::zero(); ell];
        comb[i] = BigRational::one();
        for b in &basis {
            if v[b.col].is_zero() {
                continue;
            }
            let f = &v[b.col] / &b.vec[b.col];
            for j in 0..k {
                let d = &f * &b.vec[j];
                v[j] -= d;
            }
            for j in 0..ell {
                let d = &f * &b.comb[j];
                comb[j] -= d;
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(col) => {
                basis.push(Pivot { col, vec: v, comb });
                selected.push(i);
            }
            None => {
                dependent.push(i);
                combos.push(comb);
            }
        }
    }
    if selected.is_empty() {
        return Err(Error::RankZero);
    }
    // 0 = row_i + sum_j comb_j row_j over selected j.
    let d_matrix = combos
        .iter()
        .map(|c| selected.iter().map(|&j| -c[j].clone()).collect())
        .collect();
    let rows: Vec<Vec<i64>> = selected.iter().map(|&i| p.row(i).to_vec()).collect();
    let lattice_index = minor_gcd(&rows)?;
    Ok(LiftDecomposition {
        family: p.clone(),
        rank: selected.len(),
        selected,
        dependent,
        d_matrix,
        lattice_index,
    })
}

/// Gcd of the `r x r` minors of an `r x k` integer matrix of rank `r`.
fn minor_gcd(rows: &[Vec<i64>]) -> Result<u64> {
    let r = rows.len();
    let k = rows[0].len();
    let mut cols: Vec<usize> = (0..r).collect();
    let mut g = num_bigint::BigInt::zero();
    loop {
        let m: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|row| cols.iter().map(|&c| rational::int(row[c])).collect())
            .collect();
        g = num_integer::Integer::gcd(&g, &det(m).to_integer());
        // Next r-combination of 0..k.
        let mut i = r;
        loop {
            if i == 0 {
                return num_traits::ToPrimitive::to_u64(&g.abs())
                    .ok_or(Error::Overflow("lattice index"));
            }
            i -= 1;
            if cols[i] < k - r + i {
                cols[i] += 1;
                for j in i + 1..r {
                    cols[j] = cols[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for j in c..n {
                let x = &f * &m[c][j];
                m[r][j] -= x;
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependent_row_is_recovered() {
        let p = PolynomialFamily::parse("d^2, d + d^2, 2d + 5d^2").unwrap();
        let dec = decompose(&p).unwrap();
        assert_eq!(dec.selected, vec![0, 1]);
        assert_eq!(dec.dependent, vec![2]);
        // 2d + 5d^2 = 3 d^2 + 2 (d + d^2).
        assert_eq!(dec.d_matrix[0], vec![rational::int(3), rational::int(2)]);
        assert_eq!(dec.lattice_index, 1);
    }

    #[test]
    fn lattice_index_of_scaled_rows() {
        let p = PolynomialFamily::parse("2d^2").unwrap();
        assert_eq!(decompose(&p).unwrap().lattice_index, 2);
        let p = PolynomialFamily::parse("2d + 2d^2, 2d^2").unwrap();
        assert_eq!(decompose(&p).unwrap().lattice_index, 4);
    }

    #[test]
    fn fractional_coefficients() {
        let p = PolynomialFamily::parse("2d^2, 3d^2").unwrap();
        let dec = decompose(&p).unwrap();
        assert_eq!(dec.d_matrix[0], vec![rational::ratio(3, 2)]);
    }
}
