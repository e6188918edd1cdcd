use std::fs;
use std::path::Path;

use anyhow::{anyhow, Result};
use diffsetlab::io::read_point_set;
use diffsetlab::{rational, LabConstants, PointSet, PolynomialFamily};
use num_rational::BigRational;

use crate::args::Common;
use crate::output::Session;

/// A usage error naming the offending field.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

pub fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

pub fn ratio(flag: &str, s: &str) -> Result<BigRational> {
    rational::parse(s).map_err(|e| usage(format!("--{flag}: {e}")))
}

pub fn list_i64(flag: &str, s: &str) -> Result<Vec<i64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| usage(format!("--{flag}: `{t}` is not an integer")))
        })
        .collect()
}

pub fn list_f64(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| usage(format!("--{flag}: `{t}` is not a number")))
        })
        .collect()
}

pub fn point_set(sess: &mut Session, c: &Common) -> Result<PointSet> {
    let path = require(&c.set, "set")?;
    let bytes = read(&path)?;
    sess.input("set", &bytes);
    sess.param("set", path.display().to_string());
    Ok(read_point_set(bytes.as_slice())?)
}

/// Integers of `A`, inline or from `--set` (whitespace or commas, `#`
/// comments).
pub fn int_set(sess: &mut Session, c: &Common, inline: &Option<String>) -> Result<Vec<i64>> {
    let a = match (inline, &c.set) {
        (Some(s), _) => list_i64("elems", s)?,
        (None, Some(path)) => {
            let bytes = read(path)?;
            sess.input("set", &bytes);
            let text = String::from_utf8(bytes).map_err(|_| usage("--set is not UTF-8"))?;
            let body: String = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .collect::<Vec<_>>()
                .join("\n");
            list_i64("set", &body)?
        }
        (None, None) => return Err(usage("missing --elems or --set")),
    };
    sess.param("A", &a);
    Ok(a)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| usage(format!("--set {}: {e}", path.display())))
}

pub fn poly(sess: &mut Session, c: &Common) -> Result<PolynomialFamily> {
    let src = require(&c.poly, "poly")?;
    let p = PolynomialFamily::parse(&src).map_err(|e| usage(format!("--poly: {e}")))?;
    sess.param("poly", p.coeffs());
    Ok(p)
}

pub fn n(sess: &mut Session, c: &Common) -> Result<i64> {
    let n = require(&c.n, "N")?;
    if n < 1 {
        return Err(usage("--N must be at least 1"));
    }
    sess.param("N", n);
    Ok(n)
}

pub fn m_u64(sess: &mut Session, c: &Common) -> Result<u64> {
    let s = require(&c.m, "M")?;
    let m: u64 = s
        .parse()
        .map_err(|_| usage(format!("--M: `{s}` is not a positive integer")))?;
    if m < 1 {
        return Err(usage("--M must be at least 1"));
    }
    sess.param("M", m);
    Ok(m)
}

pub fn k_or(sess: &mut Session, c: &Common, default: usize) -> usize {
    let k = c.k.unwrap_or(default);
    sess.param("k", k);
    k
}

pub fn eps_or(sess: &mut Session, c: &Common, default: BigRational) -> Result<BigRational> {
    let e = match &c.eps {
        Some(s) => ratio("eps", s)?,
        None => default,
    };
    sess.param("eps", rational::display(&e));
    Ok(e)
}

pub fn eta(sess: &mut Session, c: &Common) -> Result<BigRational> {
    let e = ratio("eta", &require(&c.eta, "eta")?)?;
    sess.param("eta", rational::display(&e));
    Ok(e)
}

/// Lab constants for dimension `k`, with every override applied.
pub fn constants(sess: &mut Session, c: &Common, k: usize) -> Result<LabConstants> {
    let mut lab = LabConstants::new(k)?;
    if let Some(s) = &c.eps {
        lab = lab.with_eps(ratio("eps", s)?)?;
    }
    if let Some(s) = &c.eta {
        lab = lab.with_eta(ratio("eta", s)?)?;
    }
    if let Some(s) = &c.sigma {
        lab = lab.with_sigma(ratio("sigma", s)?)?;
    }
    if let Some(s) = &c.c_lab {
        lab = lab.with_c_lower(ratio("c-lab", s)?)?;
    }
    if let Some(s) = &c.c_lab_upper {
        lab = lab.with_c_upper(ratio("C-lab", s)?)?;
    }
    sess.param("constants", &lab);
    Ok(lab)
}
