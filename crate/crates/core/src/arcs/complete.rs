use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{exp_sum_by_phase, NeumaierSum};

/// `S(a, q) = sum_{r=0}^{q-1} e((a_1 r + ... + a_k r^k) / q)` with exact
/// residues.
pub fn gauss_sum(a: &[i64], q: u64) -> Result<Complex64> {
    if q < 1 {
        return Err(Error::param("q", "must be at least 1"));
    }
    let q = q as i128;
    let coeffs: Vec<i128> = a.iter().map(|&x| (x as i128).rem_euclid(q)).collect();
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for r in 0..q {
        let res = poly_residue(&coeffs, r, q);
        let (s, c) = (std::f64::consts::TAU * res as f64 / q as f64).sin_cos();
        re.add(c);
        im.add(s);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

fn poly_residue(coeffs: &[i128], r: i128, q: i128) -> i128 {
    let mut power = 1i128;
    let mut acc = 0i128;
    for &c in coeffs {
        power = power * r % q;
        acc = (acc + c * power) % q;
    }
    acc
}

/// `gcd(a_1, ..., a_k, q)`.
pub fn content_gcd(a: &[i64], q: u64) -> u64 {
    a.iter().fold(q as i64, |g, &x| g.gcd(&x)).unsigned_abs()
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussReport {
    pub a: Vec<i64>,
    pub q: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub coprime: bool,
    /// `|S| / q^(1 - 1/k)`.
    pub hua_ratio: f64,
    /// `|S| <= C_hua q^(1 - 1/k)`; only checked for coprime data.
    pub within_hua: Option<bool>,
    /// `|S| <= q`.
    pub within_trivial: bool,
}

pub fn gauss_report(a: &[i64], q: u64, c_hua: f64) -> Result<GaussReport> {
    let k = a.len().max(1);
    let s = gauss_sum(a, q)?;
    let abs = s.norm();
    let scale = (q as f64).powf(1.0 - 1.0 / k as f64);
    let coprime = content_gcd(a, q) == 1;
    let ratio = abs / scale;
    Ok(GaussReport {
        a: a.to_vec(),
        q,
        re: s.re,
        im: s.im,
        abs,
        coprime,
        hua_ratio: ratio,
        within_hua: coprime.then_some(ratio <= c_hua + 1e-9),
        within_trivial: abs <= q as f64 * (1.0 + 1e-12),
    })
}

/// Largest `|S(a, q)| / q^(1 - 1/k)` over coprime `a` for one modulus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HuaRow {
    pub k: usize,
    pub q: u64,
    pub max_ratio: f64,
    pub argmax: Vec<i64>,
    pub max_abs_over_q: f64,
    pub exhaustive: bool,
    pub samples: u64,
}

/// Scans `q = 1..=q_max`: every `a in [0, q)^k` when `q^k <= exhaustive_cells`,
/// otherwise `samples` random coprime vectors drawn from a per-`q` stream.
pub fn hua_table(
    k: usize,
    q_max: u64,
    exhaustive_cells: u64,
    samples: u64,
    seed: u64,
) -> Result<Vec<HuaRow>> {
    if k < 2 {
        return Err(Error::InvalidDimension(k));
    }
    (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let cells = q.checked_pow(k as u32).unwrap_or(u64::MAX);
            let exhaustive = cells <= exhaustive_cells;
            let vectors: Vec<Vec<i64>> = if exhaustive {
                (0..cells)
                    .map(|mut idx| {
                        (0..k)
                            .map(|_| {
                                let x = (idx % q) as i64;
                                idx /= q;
                                x
                            })
                            .collect()
                    })
                    .collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(q);
                (0..samples)
                    .map(|_| (0..k).map(|_| rng.gen_range(0..q as i64)).collect())
                    .collect()
            };
            let mut best = (0.0f64, vec![0i64; k], 0.0f64);
            let mut counted = 0u64;
            for a in vectors {
                if content_gcd(&a, q) != 1 {
                    continue;
                }
                counted += 1;
                let abs = gauss_sum(&a, q)?.norm();
                let ratio = abs / (q as f64).powf(1.0 - 1.0 / k as f64);
                if ratio > best.0 {
                    best = (ratio, a, abs / q as f64);
                }
            }
            Ok(HuaRow {
                k,
                q,
                max_ratio: best.0,
                argmax: best.1,
                max_abs_over_q: best.2,
                exhaustive,
                samples: counted,
            })
        })
        .collect()
}

/// Compares the Weyl sum at `a/q` with its complete-sum approximation
/// `(D / q) S(a, q)`.
#[derive(Clone, Debug, Serialize)]
pub struct CompleteSumSplit {
    pub q: u64,
    pub d: u64,
    pub weyl_abs: f64,
    pub approx_abs: f64,
    pub difference: f64,
    /// `q + sqrt(D)`.
    pub allowance: f64,
}

pub fn complete_sum_split(a: &[i64], q: u64, d: u64) -> Result<CompleteSumSplit> {
    let s = gauss_sum(a, q)?;
    let coeffs: Vec<i128> = a
        .iter()
        .map(|&x| (x as i128).rem_euclid(q as i128))
        .collect();
    let w = exp_sum_by_phase(d, |x| {
        poly_residue(&coeffs, (x % q) as i128, q as i128) as f64 / q as f64
    });
    let approx = s * (d as f64 / q as f64);
    Ok(CompleteSumSplit {
        q,
        d,
        weyl_abs: w.norm(),
        approx_abs: approx.norm(),
        difference: (w - approx).norm(),
        allowance: q as f64 + (d as f64).sqrt(),
    })
}
