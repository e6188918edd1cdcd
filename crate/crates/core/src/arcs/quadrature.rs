use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `e(beta_1 x + ... + beta_k x^k)`.
fn integrand(beta: &[f64], x: f64) -> Complex64 {
    let mut phase = 0.0;
    for &b in beta.iter().rev() {
        phase = (phase + b) * x;
    }
    let phase = phase - phase.round();
    let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
    Complex64::new(c, s)
}

fn kronrod_panel(beta: &[f64], a: f64, b: f64) -> (Complex64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = integrand(beta, centre);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f = integrand(beta, centre - dx) + integrand(beta, centre + dx);
        kron += f * WGK[i];
        if i % 2 == 1 {
            gauss += f * WG[i / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

/// Total variation of the phase on `[0, N]` is at most
/// `sum_j |beta_j| N^j`; this many initial panels keeps each one within a
/// fraction of a period.
fn initial_panels(beta: &[f64], n: f64) -> Result<usize> {
    let variation: f64 = beta
        .iter()
        .enumerate()
        .map(|(j, b)| b.abs() * n.powi(j as i32 + 1))
        .sum();
    let panels = (2.0 * variation).ceil() + 1.0;
    if !panels.is_finite() || panels > 5e7 {
        return Err(Error::ResourceLimit(format!(
            "phase variation {variation:.3e} needs too many panels"
        )));
    }
    Ok(panels as usize)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadratureResult {
    pub re: f64,
    pub im: f64,
    pub error_bound: f64,
    pub panels: usize,
}

impl QuadratureResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `v_N(beta) = int_0^N e(beta_1 x + ... + beta_k x^k) dx` by adaptive
/// Gauss-Kronrod (7/15) panels, to absolute error `tol`.
pub fn oscillatory_integral(beta: &[f64], n: f64, tol: f64) -> Result<QuadratureResult> {
    if !(n >= 1.0) {
        return Err(Error::param("N", "must be at least 1"));
    }
    if beta.iter().all(|&b| b == 0.0) {
        return Ok(QuadratureResult {
            re: n,
            im: 0.0,
            error_bound: 0.0,
            panels: 0,
        });
    }
    let start = initial_panels(beta, n)?;
    let width = n / start as f64;
    let mut stack: Vec<(f64, f64, u32)> = (0..start)
        .rev()
        .map(|i| (i as f64 * width, ((i + 1) as f64 * width).min(n), 0))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = 0usize;
    while let Some((a, b, depth)) = stack.pop() {
        let (value, err) = kronrod_panel(beta, a, b);
        let local_tol = tol * (b - a) / n;
        if err <= local_tol.max(1e-15 * value.norm()) || depth >= 40 {
            if depth >= 40 && err > local_tol {
                return Err(Error::QuadratureNonConvergence {
                    estimate_re: total.re + value.re,
                    estimate_im: total.im + value.im,
                    error_bound: error + err,
                });
            }
            total += value;
            error += err;
            panels += 1;
            if panels > 50_000_000 {
                return Err(Error::QuadratureNonConvergence {
                    estimate_re: total.re,
                    estimate_im: total.im,
                    error_bound: error,
                });
            }
        } else {
            let mid = 0.5 * (a + b);
            stack.push((mid, b, depth + 1));
            stack.push((a, mid, depth + 1));
        }
    }
    Ok(QuadratureResult {
        re: total.re,
        im: total.im,
        error_bound: error,
        panels,
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// The same integral by composite 20-point Gauss-Legendre with panel
/// doubling until two successive estimates agree to `tol`.
pub fn oscillatory_integral_gl(beta: &[f64], n: f64, tol: f64) -> Result<QuadratureResult> {
    if !(n >= 1.0) {
        return Err(Error::param("N", "must be at least 1"));
    }
    let (nodes, weights) = gauss_legendre(20);
    let composite = |panels: usize| {
        let width = n / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = p as f64 * width;
            let centre = a + 0.5 * width;
            let mut s = Complex64::new(0.0, 0.0);
            for (x, w) in nodes.iter().zip(&weights) {
                s += integrand(beta, centre + 0.5 * width * x) * *w;
            }
            acc += s * (0.5 * width);
        }
        acc
    };
    let mut panels = initial_panels(beta, n)?;
    let mut prev = composite(panels);
    loop {
        panels *= 2;
        if panels > 1 << 26 {
            return Err(Error::QuadratureNonConvergence {
                estimate_re: prev.re,
                estimate_im: prev.im,
                error_bound: f64::NAN,
            });
        }
        let next = composite(panels);
        let diff = (next - prev).norm();
        if diff <= tol {
            return Ok(QuadratureResult {
                re: next.re,
                im: next.im,
                error_bound: diff,
                panels,
            });
        }
        prev = next;
    }
}

/// `|v_N(beta)| (1 + sum_j N^j |beta_j|)^(1/k) / N`, the constant in the
/// van der Corput decay bound.
pub fn van_der_corput_ratio(value: Complex64, beta: &[f64], n: f64) -> f64 {
    let k = beta.len().max(1) as f64;
    let spread: f64 = beta
        .iter()
        .enumerate()
        .map(|(j, b)| n.powi(j as i32 + 1) * b.abs())
        .sum();
    value.norm() * (1.0 + spread).powf(1.0 / k) / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_phase_gives_length() {
        let r = oscillatory_integral(&[0.0, 0.0], 7.0, 1e-10).unwrap();
        assert_eq!(r.value(), Complex64::new(7.0, 0.0));
    }

    #[test]
    fn linear_phase_closed_form() {
        // int_0^1 e(x) dx = 0; int_0^1 e(x/2) dx = i/pi * (1 - e(1/2)) = 2i/pi.
        let r = oscillatory_integral(&[0.5, 0.0], 1.0, 1e-12).unwrap();
        assert!((r.value() - Complex64::new(0.0, 2.0 / std::f64::consts::PI)).norm() < 1e-12);
    }

    #[test]
    fn fresnel_by_two_schemes() {
        let a = oscillatory_integral(&[0.0, 1.0], 1.0, 1e-12).unwrap();
        let b = oscillatory_integral_gl(&[0.0, 1.0], 1.0, 1e-13).unwrap();
        assert!((a.value() - b.value()).norm() < 1e-10);
    }

    #[test]
    fn conjugate_symmetry() {
        let a = oscillatory_integral(&[0.013, 0.0021], 50.0, 1e-9).unwrap();
        let b = oscillatory_integral(&[-0.013, -0.0021], 50.0, 1e-9).unwrap();
        assert!((a.value() - b.value().conj()).norm() < 1e-12);
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        let (x, w) = gauss_legendre(20);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
    }
}
