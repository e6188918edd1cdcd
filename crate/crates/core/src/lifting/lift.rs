use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::decompose::{decompose, dot, LiftDecomposition};
use crate::diffset::IntSet;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point, PointSet};
use crate::poly::PolynomialFamily;

/// Scan boxes larger than this are refused.
const SCAN_LIMIT: u64 = 1 << 26;

#[derive(Clone, Debug, Serialize)]
pub struct ShiftSearch {
    /// Shifts range over `[0, side - 1]^r`.
    pub side: u64,
    pub s: Vec<i64>,
    /// `|{b in [-N', N']^k : R(b) + s in A^r}|` at the chosen `s`.
    pub count: u64,
    /// The same count summed over every shift.
    pub total: u64,
    pub shifts_scanned: u64,
}

fn scan_points(n_prime: i64, k: usize) -> Result<impl Iterator<Item = Point>> {
    let geom = Geometry::signed(n_prime, k)?;
    let block = geom.block();
    let cells = block.cells()?;
    if cells as u64 > SCAN_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "scan box [-{n_prime},{n_prime}]^{k} has {cells} points"
        )));
    }
    Ok((0..cells).map(move |i| block.point_at(i)))
}

fn in_set(set: &IntSet, v: i128) -> bool {
    v.to_i64().is_some_and(|x| set.contains(x))
}

/// The shift `s in [0, side - 1]^r` whose fiber `{b : R(b) in A^r - s}` is
/// largest, ties broken lexicographically. `side` defaults to the index of
/// `R(Z^k)`, so the shifts meet every coset.
pub fn shift_search(
    a: &IntSet,
    dec: &LiftDecomposition,
    n_prime: i64,
    side: Option<u64>,
) -> Result<ShiftSearch> {
    let side = side.unwrap_or(dec.lattice_index).max(1);
    let r = dec.rank;
    let shifts = side
        .checked_pow(r as u32)
        .filter(|&s| s <= SCAN_LIMIT)
        .ok_or_else(|| Error::ResourceLimit(format!("{side}^{r} shifts")))?;
    let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let mut total = 0u64;
    for b in scan_points(n_prime, dec.family.k())? {
        let v = dec.reduced(&b);
        // Per axis, the shifts that land v_i in A.
        let axes: Vec<Vec<i64>> = v
            .iter()
            .map(|&x| {
                a.elems()
                    .iter()
                    .filter_map(|&e| {
                        let s = e as i128 - x;
                        (0..side as i128).contains(&s).then_some(s as i64)
                    })
                    .collect()
            })
            .collect();
        if axes.iter().any(|ax| ax.is_empty()) {
            continue;
        }
        let mut pos = vec![0usize; r];
        'odo: loop {
            let s: Vec<i64> = (0..r).map(|j| axes[j][pos[j]]).collect();
            *counts.entry(s).or_default() += 1;
            total += 1;
            let mut j = r;
            loop {
                if j == 0 {
                    break 'odo;
                }
                j -= 1;
                pos[j] += 1;
                if pos[j] < axes[j].len() {
                    break;
                }
                pos[j] = 0;
            }
        }
    }
    let best = counts
        .iter()
        .fold(None::<(&Vec<i64>, u64)>, |acc, (s, &c)| match acc {
            Some((_, bc)) if bc >= c => acc,
            _ => Some((s, c)),
        });
    match best {
        Some((s, count)) => Ok(ShiftSearch {
            side,
            s: s.clone(),
            count,
            total,
            shifts_scanned: shifts,
        }),
        None => Err(Error::EmptyFiber(format!(
            "no b in [-{n_prime},{n_prime}]^k maps into A^r - s"
        ))),
    }
}

/// `B = {b in [-N', N']^k : P(b) in A^ell - m}` with `m = (s, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct LiftedSet {
    pub decomposition: LiftDecomposition,
    pub gamma: i64,
    #[serde(rename = "N_prime")]
    pub n_prime: i64,
    pub shift: ShiftSearch,
    pub t: Vec<i64>,
    /// The full shift in original row order.
    pub m: Vec<i64>,
    /// `|{b : R(b) + s in A^r}|`.
    pub fiber_size: u64,
    pub size: u64,
    pub scan_volume: u64,
    /// Points of the fiber where `D R(b)` was not an integer.
    pub non_integral: u64,
    /// Points of `B` failing `P(b) + m in A^ell` on recheck.
    pub certificate_violations: u64,
    #[serde(skip)]
    pub set: PointSet,
}

/// `gamma = ceil((N + I - 1) / N)` for lattice index `I`, so that
/// `N' = gamma N` reaches every `x + s` with `x in [1, N]`, `s < I`.
pub fn lift_gamma(n: i64, lattice_index: u64) -> i64 {
    let i = lattice_index as i64;
    ((n + i - 1 + n - 1) / n).max(1)
}

pub fn build_lifted_set(a: &[i64], n: i64, p: &PolynomialFamily) -> Result<LiftedSet> {
    let set = IntSet::new(n, a.to_vec())?;
    if set.elems().is_empty() {
        return Err(Error::ReductionDegenerate("A is empty".into()));
    }
    let dec = decompose(p)?;
    let k = p.k();
    let gamma = lift_gamma(n, dec.lattice_index);
    let n_prime = gamma.checked_mul(n).ok_or(Error::Overflow("N'"))?;
    let shift = shift_search(&set, &dec, n_prime, None)?;
    let mut fiber: Vec<(Point, Vec<i128>)> = Vec::new();
    let mut non_integral = 0u64;
    let mut scan_volume = 0u64;
    for b in scan_points(n_prime, k)? {
        scan_volume += 1;
        let v = dec.reduced(&b);
        if !v
            .iter()
            .zip(&shift.s)
            .all(|(&x, &s)| in_set(&set, x + s as i128))
        {
            continue;
        }
        let mut w = Vec::with_capacity(dec.dependent.len());
        for (x, &i) in dec.dependent_values(&v).iter().zip(&dec.dependent) {
            if !x.is_integer() {
                non_integral += 1;
                break;
            }
            let direct = dot(p.row(i), &b);
            if x.to_integer() != direct.into() {
                return Err(Error::ReductionDegenerate(format!(
                    "D R(b) disagrees with row {i} at {b:?}"
                )));
            }
            w.push(direct);
        }
        if w.len() == dec.dependent.len() {
            fiber.push((b, w));
        }
    }
    let fiber_size = fiber.len() as u64;
    let dep = dec.dependent.len();
    let t = if dep == 0 {
        Vec::new()
    } else {
        (set.elems().len() as u64)
            .checked_pow(dep as u32)
            .and_then(|c| c.checked_mul(fiber_size))
            .filter(|&c| c <= SCAN_LIMIT)
            .ok_or_else(|| Error::ResourceLimit("t-search too large".into()))?;
        let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        let elems = set.elems();
        for (_, w) in &fiber {
            let mut pos = vec![0usize; dep];
            'odo: loop {
                let t: Option<Vec<i64>> = (0..dep)
                    .map(|j| (elems[pos[j]] as i128 - w[j]).to_i64())
                    .collect();
                if let Some(t) = t {
                    *counts.entry(t).or_default() += 1;
                }
                let mut j = dep;
                loop {
                    if j == 0 {
                        break 'odo;
                    }
                    j -= 1;
                    pos[j] += 1;
                    if pos[j] < elems.len() {
                        break;
                    }
                    pos[j] = 0;
                }
            }
        }
        let mut best: Option<(&Vec<i64>, u64)> = None;
        for (t, &c) in &counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((t, c));
            }
        }
        match best {
            Some((t, _)) => t.clone(),
            None => return Err(Error::ReductionDegenerate("empty fiber".into())),
        }
    };
    let mut m = vec![0i64; p.ell()];
    for (&i, &s) in dec.selected.iter().zip(&shift.s) {
        m[i] = s;
    }
    for (&i, &x) in dec.dependent.iter().zip(&t) {
        m[i] = x;
    }
    let lands = |b: &[i64]| (0..p.ell()).all(|i| in_set(&set, dot(p.row(i), b) + m[i] as i128));
    let points: Vec<Point> = fiber
        .into_iter()
        .map(|(b, _)| b)
        .filter(|b| lands(b))
        .collect();
    if points.is_empty() {
        return Err(Error::ReductionDegenerate("the lifted set is empty".into()));
    }
    let lifted = PointSet::new(Geometry::signed(n_prime, k)?, points)?;
    let certificate_violations = lifted.points().iter().filter(|b| !lands(b)).count() as u64;
    Ok(LiftedSet {
        decomposition: dec,
        gamma,
        n_prime,
        shift,
        t,
        m,
        fiber_size,
        size: lifted.len() as u64,
        scan_volume,
        non_integral,
        certificate_violations,
        set: lifted,
    })
}

/// The least `|d| <= d_max`, positive sign first, with `b` and
/// `b - (d, d^2, ..., d^k)` both in the set.
pub fn monomial_difference(set: &PointSet, d_max: i64) -> Option<i64> {
    let k = set.k();
    for mag in 1..=d_max {
        for d in [mag, -mag] {
            let mut curve = Vec::with_capacity(k);
            let mut x = 1i64;
            let mut ok = true;
            for _ in 0..k {
                match x.checked_mul(d) {
                    Some(v) => {
                        x = v;
                        curve.push(v);
                    }
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let hit = set.points().iter().any(|b| {
                let c: Point = b.iter().zip(&curve).map(|(x, y)| x - y).collect();
                set.contains(&c)
            });
            if hit {
                return Some(d);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_family_lifts_to_a_product() {
        let p = PolynomialFamily::parse("d, d^2").unwrap();
        let l = build_lifted_set(&[1, 2, 5], 8, &p).unwrap();
        assert_eq!(l.n_prime, 8);
        assert_eq!(l.m, vec![0, 0]);
        assert_eq!(l.size, 9);
        assert_eq!(l.certificate_violations, 0);
        // d = 1: 1 and 1 are both in A - A.
        assert_eq!(monomial_difference(&l.set, 7), Some(1));
    }

    #[test]
    fn square_family_needs_a_square_difference() {
        let p = PolynomialFamily::parse("d^2").unwrap();
        let l = build_lifted_set(&[1, 3, 8], 8, &p).unwrap();
        assert_eq!(monomial_difference(&l.set, 7), None);
        let l = build_lifted_set(&[1, 5], 8, &p).unwrap();
        assert_eq!(monomial_difference(&l.set, 7), Some(2));
    }

    #[test]
    fn dependent_rows_get_a_shift() {
        let p = PolynomialFamily::parse("d^2, 2d^2").unwrap();
        let l = build_lifted_set(&[1, 2, 3, 4], 4, &p).unwrap();
        assert_eq!(l.decomposition.dependent, vec![1]);
        assert_eq!(l.non_integral, 0);
        assert_eq!(l.certificate_violations, 0);
        assert!(l.size > 0);
    }

    #[test]
    fn index_two_uses_both_cosets() {
        let p = PolynomialFamily::parse("2d^2").unwrap();
        let dec = decompose(&p).unwrap();
        let a = IntSet::new(4, vec![3]).unwrap();
        let s = shift_search(&a, &dec, 4, None).unwrap();
        assert_eq!(s.side, 2);
        assert_eq!(s.s, vec![1]);
    }
}
