use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::LabConstants;
use crate::error::{Error, Result};
use crate::fourier::{autocorrelation_at, curve_window, window_length, EmbeddingGroup};
use crate::geometry::{Point, PointSet};
use crate::rational;

/// How `count_monomial_differences` evaluates the shifted intersections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountBackend {
    /// Membership lookups for every point and every `d`.
    Direct,
    /// Autocorrelation of `1_B` through the FFT, rounded per shift.
    Fft,
}

impl std::str::FromStr for CountBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(CountBackend::Direct),
            "fft" => Ok(CountBackend::Fft),
            other => Err(Error::Parse(format!("unknown backend `{other}`"))),
        }
    }
}

/// The shifts `(d, d^2, ..., d^k)` for `1 <= d <= floor(eps M)`, dropping
/// those that leave the box on some axis (they contribute nothing).
fn live_shifts(b: &PointSet, eps: &BigRational) -> Result<Vec<Point>> {
    let qbox = b.aniso_box()?;
    let window = match window_length(qbox.m(), eps) {
        Err(Error::EmptyWindow) => return Ok(Vec::new()),
        w => w?,
    };
    let useful = window.min(qbox.m().saturating_sub(1));
    if useful == 0 {
        return Ok(Vec::new());
    }
    curve_window(useful, qbox.k())
}

/// `|B cap (B + s)|` for each shift `s`, by direct lookup.
pub fn shift_counts_direct(b: &PointSet, shifts: &[Point]) -> Result<Vec<u64>> {
    let block = b.geometry().block();
    let inside = b.indicator()?;
    Ok(shifts
        .par_iter()
        .map(|s| {
            b.points()
                .iter()
                .filter(|p| {
                    let q: Point = p.iter().zip(s).map(|(x, y)| x + y).collect();
                    block.index_of(&q).is_some_and(|j| inside[j])
                })
                .count() as u64
        })
        .collect())
}

/// `|B cap (B + s)|` for each shift `s`, through the FFT.
pub fn shift_counts_fft(b: &PointSet, shifts: &[Point]) -> Result<Vec<u64>> {
    let qbox = b.aniso_box()?;
    let group = EmbeddingGroup::for_box(qbox, None)?;
    let f = crate::fourier::LatticeFunction::new(
        qbox.block(),
        b.indicator()?
            .into_iter()
            .map(|x| if x { 1.0 } else { 0.0 })
            .collect(),
    )?;
    let values = autocorrelation_at(&f, &group, shifts)?;
    values
        .into_iter()
        .map(|v| {
            let r = v.round();
            if (v - r).abs() > 0.25 || r < 0.0 {
                return Err(Error::Domain(format!(
                    "FFT autocorrelation {v} is not near a non-negative integer"
                )));
            }
            Ok(r as u64)
        })
        .collect()
}

/// `sum_{d=1}^{floor(eps M)} |B cap (B + (d, d^2, ..., d^k))|`, exactly.
pub fn count_monomial_differences(
    b: &PointSet,
    eps: &BigRational,
    backend: CountBackend,
) -> Result<u64> {
    let shifts = live_shifts(b, eps)?;
    if b.is_empty() || shifts.is_empty() {
        return Ok(0);
    }
    let per_shift = match backend {
        CountBackend::Direct => shift_counts_direct(b, &shifts)?,
        CountBackend::Fft => shift_counts_fft(b, &shifts)?,
    };
    Ok(per_shift.into_iter().sum())
}

/// The randomness test: is the full-range count at least
/// `(eps / 4) delta |B| M`?
#[derive(Clone, Debug, Serialize)]
pub struct RandomnessDefect {
    pub count: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub threshold: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub delta: BigRational,
    pub is_random: bool,
}

pub fn randomness_defect(b: &PointSet, consts: &LabConstants) -> Result<RandomnessDefect> {
    if b.is_empty() {
        return Err(Error::UndefinedDensity);
    }
    let qbox = b.aniso_box()?;
    let count = count_monomial_differences(b, &rational::int(1), CountBackend::Direct)?;
    let delta = b.density();
    let threshold = &consts.eps / rational::int(4)
        * &delta
        * BigRational::from_integer(BigInt::from(b.len()) * BigInt::from(qbox.m()));
    let is_random = rational::int(count) >= threshold;
    Ok(RandomnessDefect {
        count,
        threshold,
        delta,
        is_random,
    })
}
