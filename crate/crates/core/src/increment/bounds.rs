use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use crate::diffset::ln_big;
use crate::error::{Error, Result};
use crate::rational;

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    #[serde(rename = "ln_M")]
    pub ln_m: f64,
    pub k: usize,
    #[serde(rename = "C", serialize_with = "rational::serialize")]
    pub c: BigRational,
    /// Largest `delta` in `(0, 1]` with `log M <= C delta^-(k-1) log(1/delta)`.
    pub delta: f64,
    /// `(log log M / log M)^(1/(k-1))`.
    pub closed_form: f64,
    /// `delta / closed_form`.
    pub ratio: f64,
    pub iterations: u32,
}

/// Solves `log M = C delta^-(k-1) log(1/delta)` for `delta` by bisection to
/// `1e-12`. The right side decreases from `+inf` to `0` on `(0, 1]`, so the
/// admissible set is `(0, delta*]`.
pub fn bound_calculator(m: &BigUint, k: usize, c: &BigRational) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidDimension(k));
    }
    if *m < BigUint::from(16u32) {
        return Err(Error::Domain(format!("need M >= 16, got {m}")));
    }
    let cf = rational::to_f64(c);
    if !(cf > 0.0) {
        return Err(Error::param("C", "must be positive"));
    }
    let ln_m = ln_big(m);
    let g = |d: f64| cf * d.powi(-(k as i32 - 1)) * (1.0 / d).ln();
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0f64);
    let mut iterations = 0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= ln_m {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let closed_form = (ln_m.ln() / ln_m).powf(1.0 / (k as f64 - 1.0));
    Ok(BoundReport {
        ln_m,
        k,
        c: c.clone(),
        delta: lo,
        closed_form,
        ratio: lo / closed_form,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn ten_to(e: u32) -> BigUint {
        BigUint::from(10u32).pow(e)
    }

    #[test]
    fn decreasing_in_m() {
        let one = ratio(1, 1);
        let a = bound_calculator(&ten_to(6), 2, &one).unwrap().delta;
        let b = bound_calculator(&ten_to(12), 2, &one).unwrap().delta;
        let c = bound_calculator(&ten_to(24), 2, &one).unwrap().delta;
        assert!(a > b && b > c);
    }

    #[test]
    fn closed_form_within_factor_four() {
        for e in [6, 12, 24] {
            let r = bound_calculator(&ten_to(e), 2, &ratio(1, 1)).unwrap();
            assert!(r.ratio >= 0.25 && r.ratio <= 4.0, "{e}: {}", r.ratio);
        }
    }

    #[test]
    fn root_solves_the_equation() {
        let r = bound_calculator(&ten_to(9), 3, &ratio(2, 1)).unwrap();
        let lhs = 2.0 * r.delta.powi(-2) * (1.0 / r.delta).ln();
        assert!((lhs - r.ln_m).abs() / r.ln_m < 1e-9);
    }

    #[test]
    fn small_m_is_a_domain_error() {
        assert!(matches!(
            bound_calculator(&BigUint::from(15u32), 2, &ratio(1, 1)),
            Err(Error::Domain(_))
        ));
    }
}
