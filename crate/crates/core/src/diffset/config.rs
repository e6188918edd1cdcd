use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::PolynomialFamily;

/// A nonzero `d` with `P_i(d) = a_i - a'_i` for every polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigWitness {
    pub d: i64,
    /// `P_i(d)` for each `i`.
    pub values: Vec<i128>,
    /// `(a_i, a'_i)` with `a_i - a'_i = P_i(d)`.
    pub pairs: Vec<(i64, i64)>,
}

impl ConfigWitness {
    /// Re-checks every recorded pair against `A` and `P`.
    pub fn verify(&self, a: &[i64], p: &PolynomialFamily) -> bool {
        if self.d == 0 || self.pairs.len() != p.ell() {
            return false;
        }
        self.pairs.iter().enumerate().all(|(i, &(x, y))| {
            a.binary_search(&x).is_ok()
                && a.binary_search(&y).is_ok()
                && p.eval(i, self.d).ok() == Some(x as i128 - y as i128)
        })
    }
}

/// Validated integer set `A` in `[1, N]` with a dense difference table.
#[derive(Clone, Debug)]
pub struct IntSet {
    n: i64,
    elems: Vec<i64>,
    member: Vec<bool>,
}

impl IntSet {
    pub fn new(n: i64, mut elems: Vec<i64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("N", "must be at least 1"));
        }
        if n as usize > crate::geometry::DENSE_CELL_BUDGET {
            return Err(Error::ResourceLimit(format!("N = {n} too large")));
        }
        elems.sort_unstable();
        elems.dedup();
        if let Some(&x) = elems.iter().find(|&&x| x < 1 || x > n) {
            return Err(Error::PointOutsideGeometry {
                point: vec![x],
                geometry: format!("[1,{n}]"),
            });
        }
        let mut member = vec![false; n as usize + 1];
        for &x in &elems {
            member[x as usize] = true;
        }
        Ok(IntSet { n, elems, member })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn elems(&self) -> &[i64] {
        &self.elems
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= 1 && x <= self.n && self.member[x as usize]
    }

    /// `present[v] = (v in A - A)` for `0 <= v <= N - 1` (the difference set
    /// is symmetric).
    pub fn difference_table(&self) -> Vec<bool> {
        let mut present = vec![false; self.n as usize];
        for (i, &x) in self.elems.iter().enumerate() {
            for &y in &self.elems[..=i] {
                present[(x - y) as usize] = true;
            }
        }
        present
    }

    /// A pair `(a, a')` with `a - a' = v`, least `a'` first.
    pub fn pair_for(&self, v: i128) -> Option<(i64, i64)> {
        let v = i64::try_from(v).ok()?;
        self.elems
            .iter()
            .find(|&&y| self.contains(y + v))
            .map(|&y| (y + v, y))
    }
}

/// Largest `|d|` at which a configuration can fit in `[1, N]`: once
/// `|d| >= N + sum_{j<t} |c_j|` for a nonzero row of degree `t`,
/// `|P_i(d)| >= |d|^(t-1) N > N - 1`.
pub fn default_d_max(p: &PolynomialFamily, n: i64) -> i64 {
    (0..p.ell())
        .filter(|&i| p.degree(i) > 0)
        .map(|i| {
            let t = p.degree(i);
            let lower: i64 = p.row(i)[..t - 1]
                .iter()
                .fold(0i64, |acc, c| acc.saturating_add(c.saturating_abs()));
            n.saturating_add(lower) - 1
        })
        .min()
        .unwrap_or(1)
}

/// The least `|d|` (positive sign first) with `{P_1(d), ..., P_ell(d)}`
/// contained in `A - A`, scanning `1 <= |d| <= d_max`.
pub fn has_polynomial_configuration(
    a: &[i64],
    n: i64,
    p: &PolynomialFamily,
    d_max: Option<i64>,
) -> Result<Option<ConfigWitness>> {
    let set = IntSet::new(n, a.to_vec())?;
    let d_max = match d_max {
        Some(d) if d < 1 => return Err(Error::param("d_max", "must be at least 1")),
        Some(d) => d,
        None => default_d_max(p, n),
    };
    if set.elems().is_empty() {
        return Ok(None);
    }
    let present = set.difference_table();
    let in_diff = |v: i128| v.unsigned_abs() < n as u128 && present[v.unsigned_abs() as usize];
    for mag in 1..=d_max {
        for d in [mag, -mag] {
            let values = match p.eval_all(d) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if values.iter().all(|&v| in_diff(v)) {
                let pairs = values
                    .iter()
                    .map(|&v| set.pair_for(v).expect("difference present"))
                    .collect();
                return Ok(Some(ConfigWitness { d, values, pairs }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_difference_in_one_two() {
        let p = PolynomialFamily::parse("d^2").unwrap();
        let w = has_polynomial_configuration(&[1, 2], 2, &p, None)
            .unwrap()
            .unwrap();
        assert_eq!(w.d, 1);
        assert_eq!(w.pairs, vec![(2, 1)]);
        assert!(w.verify(&[1, 2], &p));
    }

    #[test]
    fn singleton_has_no_configuration() {
        let p = PolynomialFamily::parse("d^2").unwrap();
        assert!(has_polynomial_configuration(&[5], 5, &p, None)
            .unwrap()
            .is_none());
        assert!(has_polynomial_configuration(&[], 5, &p, None)
            .unwrap()
            .is_none());
    }

    #[test]
    fn linear_pair_family() {
        let p = PolynomialFamily::parse("d, 2d").unwrap();
        let a = [1, 3, 6, 10];
        let w = has_polynomial_configuration(&a, 10, &p, None)
            .unwrap()
            .unwrap();
        assert_eq!(w.d, 2);
        assert_eq!(w.pairs, vec![(3, 1), (10, 6)]);
        assert!(w.verify(&a, &p));
    }

    #[test]
    fn negative_d_is_found_when_positive_fails() {
        // P(d) = d^2 - 3d: P(1) = -2, P(-1) = 4.
        let p = PolynomialFamily::parse("d^2 - 3d").unwrap();
        let w = has_polynomial_configuration(&[1, 5], 5, &p, None)
            .unwrap()
            .unwrap();
        assert_eq!(w.d, -1);
    }

    #[test]
    fn non_positive_d_max_is_rejected() {
        let p = PolynomialFamily::parse("d^2").unwrap();
        assert!(has_polynomial_configuration(&[1], 3, &p, Some(0)).is_err());
    }

    #[test]
    fn default_scan_bound_is_complete() {
        let p = PolynomialFamily::parse("d^2 - 3d").unwrap();
        let n = 30;
        let bound = default_d_max(&p, n);
        for d in bound + 1..bound + 200 {
            for s in [d, -d] {
                assert!(p.eval(0, s).unwrap().unsigned_abs() > (n - 1) as u128);
            }
        }
    }
}
