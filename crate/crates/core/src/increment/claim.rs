use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arcs::major_radius;
use crate::error::{Error, Result};
use crate::fourier::NeumaierSum;
use crate::geometry::GridSpec;
use crate::rational;

/// Grids larger than this skip the direct-sum cross-check.
const DIRECT_LIMIT: u64 = 1 << 14;

/// Frequencies are perturbed on the lattice `2^-20` of the box radius.
const OFFSET_BITS: u32 = 20;

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub q: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub grid_size: u64,
    /// `sigma <= eta^(k-2) / (8 pi)`; when false nothing is checked.
    pub precondition_ok: bool,
    pub samples: u64,
    /// `min |1_Lambda^(alpha)| / |Lambda|` over the samples.
    pub min_ratio: f64,
    /// Samples with `|1_Lambda^(alpha)| < |Lambda| / 2`.
    pub violations: u64,
    /// Largest gap between the product formula and a direct sum.
    pub direct_max_diff: Option<f64>,
    /// `max sum_j L^j ||q^j alpha_j||` over the samples.
    pub max_phase_spread: f64,
}

/// `|1_Lambda^(alpha)| = prod_j |sin(pi L^j theta_j) / sin(pi theta_j)|`
/// with `theta_j = q^j alpha_j mod 1`.
pub fn grid_transform_abs(grid: &GridSpec, theta: &[f64]) -> f64 {
    theta
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let n = grid.range(j) as f64;
            let s = (std::f64::consts::PI * t).sin();
            if s.abs() < 1e-300 {
                n
            } else {
                ((std::f64::consts::PI * n * t).sin() / s).abs()
            }
        })
        .product()
}

/// `|sum_{lambda in Lambda} e(-lambda . alpha)|` summed point by point.
pub fn grid_transform_direct(grid: &GridSpec, theta: &[f64]) -> f64 {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for ell in grid.coordinates() {
        let phase: f64 = ell.iter().zip(theta).map(|(&l, &t)| l as f64 * t).sum();
        let z = Complex64::from_polar(1.0, -std::f64::consts::TAU * phase.fract());
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value()).norm()
}

/// Checks `|1_Lambda^(alpha)| >= |Lambda| / 2` for sampled `alpha in M_q`:
/// every box centre `a / q`, every box corner, and `samples` random interior
/// points with `a` uniform in `[1, q]^k`.
pub fn claim_c1_check(
    grid: &GridSpec,
    m: u64,
    eta: &BigRational,
    sigma: &BigRational,
    samples: u64,
    seed: u64,
) -> Result<ClaimReport> {
    let k = grid.k();
    let q = grid.q();
    let size = grid
        .cardinality()
        .to_u64()
        .ok_or(Error::Overflow("grid size"))?;
    let limit = rational::to_f64(&rational::pow(eta, k - 2)) / (8.0 * std::f64::consts::PI);
    let precondition_ok = rational::to_f64(sigma) <= limit;
    let mut report = ClaimReport {
        q,
        l: grid.l(),
        m,
        grid_size: size,
        precondition_ok,
        samples: 0,
        min_ratio: f64::INFINITY,
        violations: 0,
        direct_max_diff: (size <= DIRECT_LIMIT).then_some(0.0),
        max_phase_spread: 0.0,
    };
    if !precondition_ok {
        return Ok(report);
    }
    let radii: Vec<BigRational> = (0..k).map(|j| major_radius(eta, m, k, j)).collect();
    let denom = BigInt::from(1u64 << OFFSET_BITS);
    let mut offsets: Vec<Vec<BigRational>> = Vec::new();
    // Centres and corners at a = (1, ..., 1) and a = (q, ..., q).
    for mask in 0..(3u32.pow(k as u32)) {
        let mut mm = mask;
        offsets.push(
            (0..k)
                .map(|j| {
                    let t = (mm % 3) as i64 - 1;
                    mm /= 3;
                    &radii[j] * rational::int(t)
                })
                .collect(),
        );
    }
    let mut alphas: Vec<(Vec<i64>, Vec<BigRational>)> = Vec::new();
    for a in [vec![1i64; k], vec![q as i64; k]] {
        for off in &offsets {
            alphas.push((a.clone(), off.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=q as i64)).collect();
        let off: Vec<BigRational> = (0..k)
            .map(|j| {
                let t = rng.gen_range(-(1i64 << OFFSET_BITS)..=(1i64 << OFFSET_BITS));
                &radii[j] * BigRational::new(BigInt::from(t), denom.clone())
            })
            .collect();
        alphas.push((a, off));
    }
    let half = size as f64 / 2.0;
    for (a, off) in alphas {
        let mut theta = Vec::with_capacity(k);
        let mut spread = 0.0;
        for j in 0..k {
            let alpha = rational::ratio(a[j], q as i64) + &off[j];
            let qj = rational::int(grid.step(j));
            let t = rational::frac(&(alpha * qj));
            let dist = rational::dist_to_int(&t);
            spread += grid.range(j) as f64 * rational::to_f64(&dist);
            theta.push(rational::to_f64(&t));
        }
        let value = grid_transform_abs(grid, &theta);
        if let Some(diff) = report.direct_max_diff.as_mut() {
            *diff = diff.max((grid_transform_direct(grid, &theta) - value).abs());
        }
        report.samples += 1;
        report.min_ratio = report.min_ratio.min(value / size as f64);
        report.max_phase_spread = report.max_phase_spread.max(spread);
        if value < half {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `sigma` at the edge of the precondition, `eta^(k-2) / (8 pi)` rounded
/// down to a rational with denominator `2^32`.
pub fn sigma_at_precondition(eta: &BigRational, k: usize) -> BigRational {
    let limit = rational::to_f64(&rational::pow(eta, k - 2)) / (8.0 * std::f64::consts::PI);
    let scaled = (limit * (1u64 << 32) as f64).floor() as i64;
    BigRational::new(BigInt::from(scaled), BigInt::from(1u64 << 32)).min(BigRational::one())
}
