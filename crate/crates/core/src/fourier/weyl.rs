use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::transform::NeumaierSum;
use crate::error::{Error, Result};
use crate::rational;

/// `floor(eps * M)`, the length of the curve window.
pub fn window_length(m: u64, eps: &BigRational) -> Result<u64> {
    if !eps.is_positive() {
        return Err(Error::param("eps", "must be positive"));
    }
    let d = rational::floor_i64(&(eps * rational::int(m)))?;
    if d < 1 {
        return Err(Error::EmptyWindow);
    }
    Ok(d as u64)
}

/// The curve window `S = {(d, d^2, ..., d^k) : 1 <= d <= D}`.
pub fn curve_window(d_max: u64, k: usize) -> Result<Vec<Vec<i64>>> {
    (1..=d_max as i64)
        .map(|d| {
            let mut p = Vec::with_capacity(k);
            let mut x: i64 = 1;
            for _ in 0..k {
                x = x.checked_mul(d).ok_or(Error::Overflow("curve point"))?;
                p.push(x);
            }
            Ok(p)
        })
        .collect()
}

/// `sum_{d=1}^{n} e(alpha_1 d + ... + alpha_k d^k)` with compensated
/// accumulation.
///
/// Each term's phase is reduced mod 1 one monomial at a time, with `d^j`
/// reduced against the exact dyadic value of `alpha_j`, so large `d` does not
/// destroy the phase.
pub fn exp_sum(alpha: &[f64], n: u64) -> Complex64 {
    let phase = PolyPhase::new(alpha);
    exp_sum_by_phase(n, |d| phase.at(d))
}

/// `sum_{d=1}^{n} e(phase(d))` with compensated accumulation; `phase` is
/// taken mod 1.
pub fn exp_sum_by_phase(n: u64, mut phase: impl FnMut(u64) -> f64) -> Complex64 {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for d in 1..=n {
        let ph = phase(d);
        let (s, c) = (std::f64::consts::TAU * (ph - ph.floor())).sin_cos();
        re.add(c);
        im.add(s);
    }
    Complex64::new(re.value(), im.value())
}

/// `frac(alpha_1 d + ... + alpha_k d^k)` for real coefficients.
#[derive(Clone, Debug)]
pub struct PolyPhase {
    alpha: Vec<f64>,
    reduced: Vec<(i128, u32)>,
}

impl PolyPhase {
    pub fn new(alpha: &[f64]) -> Self {
        PolyPhase {
            alpha: alpha.to_vec(),
            reduced: alpha.iter().map(|&a| dyadic(a)).collect(),
        }
    }

    pub fn at(&self, d: u64) -> f64 {
        let mut phase = 0.0;
        let mut power: u128 = 1;
        for j in 0..self.alpha.len() {
            power = power.wrapping_mul(d as u128);
            phase += frac_of_product(self.alpha[j], &self.reduced[j], d, j + 1, power);
        }
        phase.fract()
    }
}

/// The Weyl sum `1_S^(alpha) = sum_{d=1}^{D} e(-(alpha_1 d + ... + alpha_k d^k))`
/// with `D = floor(eps M)`.
pub fn weyl_sum(alpha: &[f64], m: u64, eps: &BigRational) -> Result<Complex64> {
    let d = window_length(m, eps)?;
    Ok(exp_sum(alpha, d).conj())
}

/// `sum_{d=1}^{n} e(P(alpha, d))` with rational `alpha`, using exact modular
/// phases. Only the final `cos`/`sin` of each phase is rounded.
pub fn exp_sum_rational(alpha: &[BigRational], n: u64) -> Complex64 {
    let q = alpha
        .iter()
        .fold(BigInt::from(1), |acc, a| acc.lcm(a.denom()));
    let nums: Vec<BigInt> = alpha
        .iter()
        .map(|a| (a.numer() * (&q / a.denom())).mod_floor(&q))
        .collect();
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    if let (Some(q64), Some(nums64)) = (
        q.to_i128().filter(|&q| q < (1i128 << 62)),
        nums.iter().map(|x| x.to_i128()).collect::<Option<Vec<_>>>(),
    ) {
        for d in 1..=n as i128 {
            let dm = d % q64;
            let mut power = 1i128;
            let mut r = 0i128;
            for c in &nums64 {
                power = power * dm % q64;
                r = (r + c * power) % q64;
            }
            let (s, c) = (std::f64::consts::TAU * (r as f64 / q64 as f64)).sin_cos();
            re.add(c);
            im.add(s);
        }
    } else {
        let qf = rational::to_f64(&BigRational::from_integer(q.clone()));
        for d in 1..=n {
            let dm = BigInt::from(d) % &q;
            let mut power = BigInt::from(1);
            let mut r = BigInt::zero();
            for c in &nums {
                power = (power * &dm) % &q;
                r = (r + c * &power) % &q;
            }
            let ph = rational::to_f64(&BigRational::from_integer(r)) / qf;
            let (s, c) = (std::f64::consts::TAU * ph).sin_cos();
            re.add(c);
            im.add(s);
        }
    }
    Complex64::new(re.value(), im.value())
}

/// Exact Weyl sum at a rational frequency.
pub fn weyl_sum_rational(alpha: &[BigRational], m: u64, eps: &BigRational) -> Result<Complex64> {
    let d = window_length(m, eps)?;
    Ok(exp_sum_rational(alpha, d).conj())
}

/// Writes a finite `x` as `mant * 2^-shift` with `mant` an integer
/// (`shift` capped at 1074, the subnormal range).
fn dyadic(x: f64) -> (i128, u32) {
    if x == 0.0 || !x.is_finite() {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i128 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = if exp == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    // x = mant * 2^(exp - 1075)
    let e = exp - 1075;
    if e >= 0 {
        // Integral: contributes nothing mod 1.
        (0, 0)
    } else {
        let mut m = mant as i128;
        let mut shift = (-e) as u32;
        while m & 1 == 0 && shift > 0 {
            m >>= 1;
            shift -= 1;
        }
        (sign * m, shift)
    }
}

/// `frac(alpha * d^j)` computed from the dyadic representation when the
/// denominator is small enough for exact modular arithmetic, otherwise in
/// plain floating point.
fn frac_of_product(alpha: f64, dy: &(i128, u32), d: u64, j: usize, wrapped_power: u128) -> f64 {
    let (mant, shift) = *dy;
    if mant == 0 {
        return 0.0;
    }
    if shift <= 64 {
        let modulus: u128 = 1u128 << shift;
        let mask = modulus - 1;
        // d^j mod 2^shift is the low bits of the wrapped power.
        let p = wrapped_power & mask;
        let m = (mant.rem_euclid(modulus as i128)) as u128;
        let r = m.wrapping_mul(p) & mask;
        return r as f64 / modulus as f64;
    }
    let x = alpha * (d as f64).powi(j as i32);
    x - x.floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn zero_frequency_counts_the_window() {
        let s = weyl_sum(&[0.0, 0.0], 40, &ratio(1, 4)).unwrap();
        assert!((s - Complex64::new(10.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn alternating_sums() {
        let s = exp_sum(&[0.5, 0.0], 7);
        assert!(s.norm() <= 1.0 + 1e-12);
        let s = exp_sum(&[0.0, 0.5], 4);
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(matches!(
            weyl_sum(&[0.0, 0.0], 3, &ratio(1, 4)),
            Err(Error::EmptyWindow)
        ));
    }

    #[test]
    fn float_and_rational_phases_agree() {
        let alpha = [ratio(3, 8), ratio(5, 16)];
        let af: Vec<f64> = alpha.iter().map(rational::to_f64).collect();
        let a = exp_sum(&af, 5000);
        let b = exp_sum_rational(&alpha, 5000);
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn large_d_keeps_dyadic_phases_exact() {
        // alpha = 1/4: d^2/4 mod 1 is 0 or 1/4.
        let s = exp_sum(&[0.0, 0.25], 1_000_000);
        let t = exp_sum_rational(&[ratio(0, 1), ratio(1, 4)], 1_000_000);
        assert!((s - t).norm() < 1e-6);
    }

    #[test]
    fn curve_window_points() {
        assert_eq!(
            curve_window(3, 2).unwrap(),
            vec![vec![1, 1], vec![2, 4], vec![3, 9]]
        );
    }
}
