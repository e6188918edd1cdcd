use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational;

/// A major box `M_q(eta)` around `a / q`: every axis satisfies
/// `||alpha_j - a_j / q|| <= 1 / (eta^k M^j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MajorBoxSpec {
    pub q: u64,
    pub a: Vec<i64>,
    #[serde(serialize_with = "rational::serialize")]
    pub eta: BigRational,
    #[serde(rename = "M")]
    pub m: u64,
    pub k: usize,
    /// `gcd(a_1, ..., a_k, q) = 1`.
    pub coprime: bool,
}

impl MajorBoxSpec {
    pub fn new(q: u64, a: Vec<i64>, eta: BigRational, m: u64, k: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::param("q", "must be at least 1"));
        }
        if a.len() != k {
            return Err(Error::param("a", format!("expected {k} entries")));
        }
        if a.iter().any(|&x| x < 1 || x as u64 > q) {
            return Err(Error::param("a", format!("entries must lie in [1,{q}]")));
        }
        if !eta.is_positive() {
            return Err(Error::param("eta", "must be positive"));
        }
        let coprime = a.iter().fold(q as i64, |g, &x| g.gcd(&x)) == 1;
        Ok(MajorBoxSpec {
            q,
            a,
            eta,
            m,
            k,
            coprime,
        })
    }

    /// `1 / (eta^k M^j)` for `j = axis + 1`.
    pub fn radius(&self, axis: usize) -> BigRational {
        major_radius(&self.eta, self.m, self.k, axis)
    }

    /// Exact membership of a rational frequency.
    pub fn contains(&self, alpha: &[BigRational]) -> bool {
        alpha.len() == self.k
            && (0..self.k).all(|axis| {
                let centre = rational::ratio(self.a[axis], self.q as i64);
                rational::dist_to_int(&(&alpha[axis] - centre)) <= self.radius(axis)
            })
    }

    /// Membership in the finer variant `|alpha_j - a_j/q| <= N^(mu - j)`
    /// (torus distance; floating point since the radius is irrational).
    pub fn contains_fine(&self, alpha: &[f64], n: f64, mu: f64) -> bool {
        alpha.len() == self.k
            && (0..self.k).all(|axis| {
                let x = alpha[axis] - self.a[axis] as f64 / self.q as f64;
                let d = (x - x.round()).abs();
                d <= n.powf(mu - (axis + 1) as f64)
            })
    }
}

pub fn major_radius(eta: &BigRational, m: u64, k: usize, axis: usize) -> BigRational {
    let denom = rational::pow(eta, k) * rational::pow(&rational::int(m), axis + 1);
    BigRational::one() / denom
}

/// `floor(eta^-k)`, erroring when it is below one.
pub fn q_limit(eta: &BigRational, k: usize) -> Result<u64> {
    if !eta.is_positive() {
        return Err(Error::param("eta", "must be positive"));
    }
    let inv = rational::pow(&(BigRational::one() / eta), k);
    let q = inv.floor().to_integer();
    if q < BigInt::one() {
        return Err(Error::DegenerateResolution(rational::to_f64(&inv)));
    }
    q.to_u64().ok_or(Error::Overflow("eta^-k"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum FrequencyClass {
    Major { q: u64, a: Vec<i64> },
    Minor,
}

impl FrequencyClass {
    pub fn is_major(&self) -> bool {
        matches!(self, FrequencyClass::Major { .. })
    }
}

/// For each axis, the `a_j in [1, q]` nearest to `q alpha_j` on the torus if
/// it is within the major radius.
pub fn major_witness(alpha: &[BigRational], q: u64, radii: &[BigRational]) -> Option<Vec<i64>> {
    let qr = rational::int(q);
    let mut a = Vec::with_capacity(alpha.len());
    for (x, r) in alpha.iter().zip(radii) {
        // Nearest multiple of 1/q to x.
        let scaled = x * &qr;
        let nearest = (scaled + rational::ratio(1, 2)).floor().to_integer();
        let aj = nearest.mod_floor(&BigInt::from(q));
        let aj = if aj == BigInt::from(0) {
            BigInt::from(q)
        } else {
            aj
        };
        let centre = BigRational::new(aj.clone(), BigInt::from(q));
        if rational::dist_to_int(&(x - centre)) > *r {
            return None;
        }
        a.push(aj.to_i64()?);
    }
    Some(a)
}

/// The least `q <= floor(eta^-k)` whose major box contains `alpha`, with its
/// witness `a`, or `Minor`.
pub fn classify_frequency(
    alpha: &[BigRational],
    eta: &BigRational,
    m: u64,
    k: usize,
) -> Result<FrequencyClass> {
    if alpha.len() != k {
        return Err(Error::param("alpha", format!("expected {k} coordinates")));
    }
    let q_max = q_limit(eta, k)?;
    let radii: Vec<BigRational> = (0..k).map(|axis| major_radius(eta, m, k, axis)).collect();
    for q in 1..=q_max {
        if let Some(a) = major_witness(alpha, q, &radii) {
            return Ok(FrequencyClass::Major { q, a });
        }
    }
    Ok(FrequencyClass::Minor)
}

/// Whether `M >= eta^-C` holds for the configured constant.
pub fn resolution_advisory(eta: &BigRational, m: u64, c_lab: f64) -> bool {
    let eta = rational::to_f64(eta);
    (m as f64) >= eta.powf(-c_lab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn origin_is_major_at_q_one() {
        let c = classify_frequency(&[ratio(0, 1), ratio(0, 1)], &ratio(1, 2), 100, 2).unwrap();
        assert_eq!(
            c,
            FrequencyClass::Major {
                q: 1,
                a: vec![1, 1]
            }
        );
    }

    #[test]
    fn half_is_major_at_q_two() {
        let c = classify_frequency(&[ratio(1, 2), ratio(0, 1)], &ratio(1, 2), 1000, 2).unwrap();
        assert_eq!(
            c,
            FrequencyClass::Major {
                q: 2,
                a: vec![1, 2]
            }
        );
    }

    #[test]
    fn badly_approximable_point_is_minor() {
        // Continued-fraction convergents of the golden ratio have large
        // denominators, so nothing with q <= 4 is close.
        let phi = ratio(618_033_988_749, 1_000_000_000_000);
        let c = classify_frequency(&[phi.clone(), phi], &ratio(1, 2), 1_000_000, 2).unwrap();
        assert_eq!(c, FrequencyClass::Minor);
    }

    #[test]
    fn eta_above_one_is_degenerate() {
        assert!(matches!(
            classify_frequency(&[ratio(0, 1), ratio(0, 1)], &ratio(2, 1), 10, 2),
            Err(Error::DegenerateResolution(_))
        ));
    }

    #[test]
    fn box_membership_matches_classification() {
        let spec = MajorBoxSpec::new(3, vec![1, 2], ratio(1, 2), 10, 2).unwrap();
        assert!(spec.coprime);
        let r0 = spec.radius(0);
        let inside = vec![ratio(1, 3) + &r0, ratio(2, 3)];
        assert!(spec.contains(&inside));
        let outside = vec![ratio(1, 3) + &r0 + ratio(1, 1_000_000), ratio(2, 3)];
        assert!(!spec.contains(&outside));
    }

    #[test]
    fn wraps_around_the_torus() {
        let spec = MajorBoxSpec::new(1, vec![1, 1], ratio(1, 1), 10, 2).unwrap();
        assert!(spec.contains(&[ratio(99, 100), ratio(0, 1)]));
    }
}
