use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::LabConstants;
use crate::error::{Error, Result};
use crate::fourier::{balance_function, dft, EmbeddingGroup, NeumaierSum};
use crate::geometry::PointSet;
use crate::rational;

pub const DEFAULT_Q_CAP: u64 = 256;

/// Normalized `L^2` mass of `f_B^` on the major boxes `M_q`:
/// `(1 / (delta |B|)) (1 / prod T_j) sum_{xi in M_q} |f_B^(xi)|^2`.
#[derive(Clone, Debug, Serialize)]
pub struct MassRow {
    pub q: u64,
    pub mass: f64,
    /// Same sum with every box radius grown by one lattice step.
    pub inflated: f64,
    /// Same sum with every box radius shrunk by one lattice step.
    pub deflated: f64,
    /// `inflated - deflated`, the mass in the boundary layer.
    pub discretization: f64,
    pub lattice_points: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MassTable {
    pub group: EmbeddingGroup,
    #[serde(serialize_with = "rational::serialize")]
    pub delta: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub eta: BigRational,
    pub q_max: u64,
    /// Rows stop at the cap when `q_max` exceeds it.
    pub truncated: bool,
    pub rows: Vec<MassRow>,
    pub max_mass: f64,
    pub argmax_q: u64,
    /// Mass over every frequency, `(1 / (delta |B|)) sum_m f_B(m)^2`.
    pub total_mass: f64,
    /// `(1 - delta) / delta`, the exact value of `total_mass`.
    pub expected_total: f64,
}

struct Prepared {
    group: EmbeddingGroup,
    power: Vec<f64>,
    norm: f64,
    delta: BigRational,
    eta: BigRational,
    q_max: u64,
    m: u64,
    k: usize,
}

fn prepare(b: &PointSet, consts: &LabConstants) -> Result<Prepared> {
    if b.is_empty() {
        return Err(Error::UndefinedDensity);
    }
    let qbox = b.aniso_box()?;
    let cal = consts.calibrate(&b.density())?;
    let q_max = cal.q_max(qbox.k())?;
    let group = EmbeddingGroup::for_box(qbox, Some(&cal.eta))?;
    let f = balance_function(b)?.to_lattice_function()?;
    let spectrum = dft(&f, &group)?;
    let power: Vec<f64> = spectrum.values().iter().map(|v| v.norm_sqr()).collect();
    let norm = group.size()? as f64 * rational::to_f64(&cal.delta) * b.len() as f64;
    Ok(Prepared {
        group,
        power,
        norm,
        delta: cal.delta,
        eta: cal.eta,
        q_max,
        m: qbox.m(),
        k: qbox.k(),
    })
}

/// Frequency indices `xi` on an axis of length `t` with
/// `||xi / t - a / q|| <= r` for some integer `a`, where `r q t` is replaced
/// by `reach`: `min(x, t - x) <= reach` for `x = xi q mod t`.
fn axis_mask(t: usize, q: u64, reach: i128) -> Vec<usize> {
    if reach < 0 {
        return Vec::new();
    }
    let (t128, q128) = (t as i128, q as i128);
    (0..t)
        .filter(|&xi| {
            let x = (xi as i128 * q128).rem_euclid(t128);
            x.min(t128 - x) <= reach
        })
        .collect()
}

/// Sum of `power` over the product of per-axis index lists.
fn masked_sum(power: &[f64], group: &EmbeddingGroup, masks: &[Vec<usize>]) -> (f64, u64) {
    if masks.iter().any(|m| m.is_empty()) {
        return (0.0, 0);
    }
    let strides = group.strides();
    let k = masks.len();
    let mut pos = vec![0usize; k];
    let mut acc = NeumaierSum::default();
    let mut n = 0u64;
    loop {
        let idx: usize = (0..k).map(|j| masks[j][pos[j]] * strides[j]).sum();
        acc.add(power[idx]);
        n += 1;
        let mut axis = k;
        loop {
            if axis == 0 {
                return (acc.value(), n);
            }
            axis -= 1;
            pos[axis] += 1;
            if pos[axis] < masks[axis].len() {
                break;
            }
            pos[axis] = 0;
        }
    }
}

fn row(p: &Prepared, q: u64) -> Result<MassRow> {
    let lengths = p.group.lengths();
    let mut reach = Vec::with_capacity(p.k);
    for axis in 0..p.k {
        let r = crate::arcs::major_radius(&p.eta, p.m, p.k, axis);
        let span = &r * rational::int(lengths[axis] as u64);
        if span < rational::int(4) {
            return Err(Error::RefinementRequired {
                axis,
                points: rational::floor_i64(&span)?.max(0) as u64,
                needed: 4,
            });
        }
        let rq = (span * rational::int(q)).floor().to_integer();
        reach.push(rq.to_i128().ok_or(Error::Overflow("major box reach"))?);
    }
    let sum_at = |delta: i128| {
        let masks: Vec<Vec<usize>> = (0..p.k)
            .map(|j| axis_mask(lengths[j], q, reach[j] + delta))
            .collect();
        masked_sum(&p.power, &p.group, &masks)
    };
    let (mass, points) = sum_at(0);
    let (inflated, _) = sum_at(q as i128);
    let (deflated, _) = sum_at(-(q as i128));
    Ok(MassRow {
        q,
        mass: mass / p.norm,
        inflated: inflated / p.norm,
        deflated: deflated / p.norm,
        discretization: (inflated - deflated) / p.norm,
        lattice_points: points,
    })
}

/// The normalized major-box mass for one modulus.
pub fn l2_mass_on_major_boxes(b: &PointSet, q: u64, consts: &LabConstants) -> Result<MassRow> {
    if q < 1 {
        return Err(Error::param("q", "must be at least 1"));
    }
    row(&prepare(b, consts)?, q)
}

/// Masses for every `q <= min(floor(eta^-k), q_cap)`.
pub fn l2_mass_table(b: &PointSet, consts: &LabConstants, q_cap: u64) -> Result<MassTable> {
    let p = prepare(b, consts)?;
    let top = p.q_max.min(q_cap.max(1));
    let rows: Vec<MassRow> = (1..=top)
        .into_par_iter()
        .map(|q| row(&p, q))
        .collect::<Result<_>>()?;
    let (argmax_q, max_mass) = rows.iter().fold((1, f64::NEG_INFINITY), |(bq, bm), r| {
        if r.mass > bm {
            (r.q, r.mass)
        } else {
            (bq, bm)
        }
    });
    let mut total = NeumaierSum::default();
    for &x in &p.power {
        total.add(x);
    }
    let d = rational::to_f64(&p.delta);
    Ok(MassTable {
        total_mass: total.value() / p.norm,
        expected_total: (1.0 - d) / d,
        truncated: top < p.q_max,
        q_max: p.q_max,
        delta: p.delta,
        eta: p.eta,
        group: p.group,
        rows,
        max_mass,
        argmax_q,
    })
}

/// The two spectral estimates side by side: the major-box mass must reach
/// `c delta^(k-1)` for some `q`, while a regular set keeps every `M_q` mass
/// below `12 sigma`. With `sigma <= c delta^(k-1) / 13` both cannot hold.
#[derive(Clone, Debug, Serialize)]
pub struct ContradictionReport {
    pub table: MassTable,
    #[serde(serialize_with = "rational::serialize")]
    pub sigma: BigRational,
    /// `c delta^(k-1)`.
    pub lower_threshold: f64,
    /// `12 sigma`.
    pub upper_bound: f64,
    /// `sigma <= c delta^(k-1) / 13`.
    pub sigma_small: bool,
    /// `max_q mass >= c delta^(k-1)`.
    pub lower_holds: bool,
    /// Every `mass <= 12 sigma + discretization`.
    pub upper_holds: bool,
    /// All three at once, which the argument rules out.
    pub conflict: bool,
}

pub fn contradiction_report(
    b: &PointSet,
    consts: &LabConstants,
    q_cap: u64,
) -> Result<ContradictionReport> {
    let table = l2_mass_table(b, consts, q_cap)?;
    let cal = consts.calibrate(&table.delta)?;
    let k = b.k();
    let lower = &consts.c_lower * rational::pow(&cal.delta, k - 1);
    let sigma_small = cal.sigma <= &lower / rational::int(13);
    let lower_threshold = rational::to_f64(&lower);
    let upper_bound = 12.0 * rational::to_f64(&cal.sigma);
    let lower_holds = table.max_mass >= lower_threshold;
    let upper_holds = table
        .rows
        .iter()
        .all(|r| r.mass <= upper_bound + r.discretization);
    Ok(ContradictionReport {
        conflict: sigma_small && lower_holds && upper_holds,
        table,
        sigma: cal.sigma,
        lower_threshold,
        upper_bound,
        sigma_small,
        lower_holds,
        upper_holds,
    })
}

/// `(1 - delta) / delta` as an exact rational.
pub fn expected_total_mass(delta: &BigRational) -> BigRational {
    (BigRational::one() - delta) / delta
}

/// Exact normalized total `(1 / (delta |B|)) sum_m f_B(m)^2`.
pub fn exact_total_mass(b: &PointSet) -> Result<BigRational> {
    let f = balance_function(b)?;
    let delta = b.density();
    Ok(f.exact_l2_norm_sq()? / (&delta * BigRational::from_integer(BigInt::from(b.len()))))
}
