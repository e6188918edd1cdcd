//! Laboratory constants.
//!
//! The asymptotic argument works with unspecified absolute constants `c` and
//! `C`. At desk scale they are configurable numbers (default 1) and the
//! harnesses report the constants they actually observe.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, ratio};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabConstants {
    pub k: usize,
    /// Window fraction: the curve segment is `1 <= d <= eps*M`.
    #[serde(serialize_with = "rational::serialize")]
    pub eps: BigRational,
    /// Stand-in for the large constant `C`.
    #[serde(serialize_with = "rational::serialize")]
    pub c_upper: BigRational,
    /// Stand-in for the small constant `c`.
    #[serde(serialize_with = "rational::serialize")]
    pub c_lower: BigRational,
    /// Replaces `eta = delta / (8 C)` when set.
    #[serde(serialize_with = "rational::serialize_opt")]
    pub eta_override: Option<BigRational>,
    /// Replaces `sigma = c delta^(k-1)` when set.
    #[serde(serialize_with = "rational::serialize_opt")]
    pub sigma_override: Option<BigRational>,
    /// Major-arc exponent of the refined Weyl estimates.
    #[serde(serialize_with = "rational::serialize")]
    pub mu: BigRational,
    /// Minor-arc saving exponent (a fitted quantity; this is only a seed).
    #[serde(serialize_with = "rational::serialize")]
    pub nu: BigRational,
}

/// Density-dependent parameters derived from [`LabConstants`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Calibrated {
    #[serde(serialize_with = "rational::serialize")]
    pub delta: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub eta: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub sigma: BigRational,
}

impl LabConstants {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidDimension(k));
        }
        let kk = k as i64;
        Ok(LabConstants {
            k,
            eps: ratio(1, 10 * kk),
            c_upper: BigRational::one(),
            c_lower: BigRational::one(),
            eta_override: None,
            sigma_override: None,
            mu: ratio(1, 4 * kk),
            nu: ratio(1, 4 * kk),
        })
    }

    pub fn with_eps(mut self, eps: BigRational) -> Result<Self> {
        if !eps.is_positive() || eps > ratio(1, 10 * self.k as i64) {
            return Err(Error::param(
                "eps",
                format!("need 0 < eps <= 1/(10k), got {}", rational::display(&eps)),
            ));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_c_upper(mut self, c: BigRational) -> Result<Self> {
        positive("C_lab", &c)?;
        self.c_upper = c;
        Ok(self)
    }

    pub fn with_c_lower(mut self, c: BigRational) -> Result<Self> {
        positive("c_lab", &c)?;
        self.c_lower = c;
        Ok(self)
    }

    pub fn with_eta(mut self, eta: BigRational) -> Result<Self> {
        positive("eta", &eta)?;
        self.eta_override = Some(eta);
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: BigRational) -> Result<Self> {
        positive("sigma", &sigma)?;
        self.sigma_override = Some(sigma);
        Ok(self)
    }

    /// `eta` and `sigma` at density `delta`, recomputed on every call.
    pub fn calibrate(&self, delta: &BigRational) -> Result<Calibrated> {
        if !delta.is_positive() {
            return Err(Error::UndefinedDensity);
        }
        let eta = match &self.eta_override {
            Some(e) => e.clone(),
            None => delta / (&self.c_upper * rational::int(8)),
        };
        let sigma = match &self.sigma_override {
            Some(s) => s.clone(),
            None => &self.c_lower * rational::pow(delta, self.k - 1),
        };
        Ok(Calibrated {
            delta: delta.clone(),
            eta,
            sigma,
        })
    }
}

impl Calibrated {
    /// `floor(eta^-k)`, the largest modulus of a major box.
    pub fn q_max(&self, k: usize) -> Result<u64> {
        let inv = rational::pow(&(BigRational::one() / &self.eta), k);
        let q = rational::floor_i64(&inv)?;
        if q < 1 {
            return Err(Error::DegenerateResolution(rational::to_f64(&inv)));
        }
        Ok(q as u64)
    }
}

fn positive(name: &'static str, x: &BigRational) -> Result<()> {
    if x.is_zero() || x.is_negative() {
        return Err(Error::param(name, "must be positive"));
    }
    Ok(())
}
