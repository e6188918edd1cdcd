use std::path::{Path, PathBuf};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{exp_sum_by_phase, PolyPhase};

#[derive(Clone, Debug, Serialize)]
pub struct WeylRatio {
    pub n: u64,
    pub q: u64,
    pub a: i64,
    /// `|sum_{d=1}^{N} e(P(alpha, d))|`.
    pub lhs: f64,
    /// `N^(1+eps) (1/q + 1/N + q/N^k)^(1/2^(k-1))`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Direct Weyl sum with leading coefficient exactly `a / q` against the
/// Weyl-inequality bound (constant 1). `alpha_rest` holds the coefficients
/// of `d, ..., d^(k-1)`.
pub fn weyl_inequality_ratio(
    a: i64,
    q: u64,
    alpha_rest: &[f64],
    n: u64,
    k: usize,
    eps_exp: f64,
) -> Result<WeylRatio> {
    if q < 1 || n < 1 {
        return Err(Error::param("q, N", "must be at least 1"));
    }
    if k < 2 || alpha_rest.len() != k - 1 {
        return Err(Error::param(
            "alpha_rest",
            format!(
                "need k >= 2 and k - 1 = {} lower coefficients",
                k.saturating_sub(1)
            ),
        ));
    }
    if a.gcd(&(q as i64)) != 1 {
        return Err(Error::Precondition(format!("gcd({a}, {q}) != 1")));
    }
    let lower = PolyPhase::new(alpha_rest);
    let qi = q as i128;
    let ai = (a as i128).rem_euclid(qi);
    let lhs = exp_sum_by_phase(n, |d| {
        let dm = d as i128 % qi;
        let mut p = 1i128;
        for _ in 0..k {
            p = p * dm % qi;
        }
        lower.at(d) + (ai * p % qi) as f64 / q as f64
    })
    .norm();
    let nf = n as f64;
    let inner = 1.0 / q as f64 + 1.0 / nf + q as f64 / nf.powi(k as i32);
    let rhs = nf.powf(1.0 + eps_exp) * inner.powf(1.0 / (1u64 << (k - 1)) as f64);
    Ok(WeylRatio {
        n,
        q,
        a,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// One row of a fixture table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub k: usize,
    pub m_or_n: u64,
    pub q: u64,
    pub eta: String,
    pub quantity: String,
    pub empirical_constant: f64,
    pub seed: u64,
}

pub const FIXTURE_HEADER: &str = "k,M_or_N,q,eta,quantity,empirical_constant,seed";

pub fn fixtures_to_csv(rows: &[FixtureRow]) -> String {
    let mut out = String::from(FIXTURE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:e},{}\n",
            r.k, r.m_or_n, r.q, r.eta, r.quantity, r.empirical_constant, r.seed
        ));
    }
    out
}

pub fn fixtures_from_csv(text: &str) -> Result<Vec<FixtureRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == FIXTURE_HEADER => {}
        _ => return Err(Error::Parse("fixture table: missing header".into())),
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Parse(format!(
                    "fixture row `{line}`: expected 7 fields"
                )));
            }
            let bad = |what: &str| Error::Parse(format!("fixture row `{line}`: bad {what}"));
            Ok(FixtureRow {
                k: f[0].parse().map_err(|_| bad("k"))?,
                m_or_n: f[1].parse().map_err(|_| bad("M_or_N"))?,
                q: f[2].parse().map_err(|_| bad("q"))?,
                eta: f[3].to_string(),
                quantity: f[4].to_string(),
                empirical_constant: f[5].parse().map_err(|_| bad("empirical_constant"))?,
                seed: f[6].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}

/// Fixture directory: `$DIFFSETLAB_FIXTURES` or the crate's `fixtures/`.
pub fn fixtures_dir() -> PathBuf {
    std::env::var_os("DIFFSETLAB_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

/// Weyl-inequality ratios at `N` in `ns` for `k = 2`, with `q` the prime
/// nearest `sqrt(N)` and `a` drawn from a seeded stream; `trials` draws
/// per `N`, reporting the largest ratio.
pub fn weyl_ratio_table(ns: &[u64], trials: u64, seed: u64) -> Result<Vec<FixtureRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let q = nearest_prime((n as f64).sqrt().round() as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n);
        let mut best = 0.0f64;
        for _ in 0..trials {
            let a = rng.gen_range(1..q as i64);
            let lin: f64 = rng.gen_range(0.0..1.0);
            let r = weyl_inequality_ratio(a, q, &[lin], n, 2, 0.0)?;
            best = best.max(r.ratio);
        }
        rows.push(FixtureRow {
            k: 2,
            m_or_n: n,
            q,
            eta: String::new(),
            quantity: "weyl_ratio".into(),
            empirical_constant: best,
            seed,
        });
    }
    Ok(rows)
}

fn nearest_prime(x: u64) -> u64 {
    let is_prime = |p: u64| p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
    (0..)
        .find_map(|off| {
            [x.saturating_sub(off), x + off]
                .into_iter()
                .find(|&p| is_prime(p))
        })
        .expect("primes are unbounded")
}
