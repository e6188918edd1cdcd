use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::group::EmbeddingGroup;
use super::transform::{dft, pairwise_sum, LatticeFunction, NdFft};
use super::weyl::{curve_window, window_length};
use crate::error::{Error, Result};
use crate::geometry::{AnisoBox, Point, PointSet};
use crate::rational;

/// `f_B = 1_B - delta 1_{Q_M}` with `delta` kept exact.
#[derive(Clone, Debug)]
pub struct BalanceFunction {
    set: PointSet,
    delta: BigRational,
}

/// The balance function of a set in `Q_M`. The empty set gives `f = 0`.
pub fn balance_function(b: &PointSet) -> Result<BalanceFunction> {
    b.aniso_box()?;
    Ok(BalanceFunction {
        set: b.clone(),
        delta: b.density(),
    })
}

impl BalanceFunction {
    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn set(&self) -> &PointSet {
        &self.set
    }

    pub fn aniso_box(&self) -> &AnisoBox {
        self.set.aniso_box().expect("checked on construction")
    }

    /// Exact value at `p`.
    pub fn value_at(&self, p: &[i64]) -> BigRational {
        if !self.aniso_box().contains(p) {
            return BigRational::zero();
        }
        let one = if self.set.contains(p) { 1 } else { 0 };
        rational::int(one) - &self.delta
    }

    /// Integer values `g = |Q_M| 1_B - |B| 1_{Q_M} = |Q_M| f_B` on the box
    /// in row-major order.
    pub fn scaled_values(&self) -> Result<Vec<i128>> {
        let vol = self.volume_i128()?;
        let size = self.set.len() as i128;
        Ok(self
            .set
            .indicator()?
            .into_iter()
            .map(|inside| if inside { vol - size } else { -size })
            .collect())
    }

    /// `sum_m f_B(m)`, accumulated point by point in exact arithmetic.
    pub fn exact_sum(&self) -> Result<BigRational> {
        let total: i128 = self.scaled_values()?.into_iter().sum();
        Ok(BigRational::new(
            BigInt::from(total),
            BigInt::from(self.volume_i128()?),
        ))
    }

    /// `sum_m f_B(m)^2`, exactly.
    pub fn exact_l2_norm_sq(&self) -> Result<BigRational> {
        let total: BigInt = self
            .scaled_values()?
            .into_iter()
            .map(|g| BigInt::from(g) * BigInt::from(g))
            .sum();
        let v = BigInt::from(self.volume_i128()?);
        Ok(BigRational::new(total, &v * &v))
    }

    pub fn to_lattice_function(&self) -> Result<LatticeFunction> {
        let d = rational::to_f64(&self.delta);
        let block = self.aniso_box().block();
        let values = self
            .set
            .indicator()?
            .into_iter()
            .map(|inside| if inside { 1.0 - d } else { -d })
            .collect();
        LatticeFunction::new(block, values)
    }

    fn volume_i128(&self) -> Result<i128> {
        self.aniso_box()
            .volume()
            .to_i128()
            .ok_or(Error::Overflow("box volume"))
    }
}

/// The weighted count `sum_{m,n} f_B(m) f_B(n) 1_S(m - n)` evaluated directly
/// and through its expansion into four pair counts.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedCountIdentity {
    /// `|S| = floor(eps M)`.
    pub window: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub delta: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub direct: BigRational,
    /// `sum 1_B(m) 1_B(n) 1_S(m - n)`.
    pub bb: u64,
    /// `sum 1_B(m) 1_Q(n) 1_S(m - n)`.
    pub bq: u64,
    /// `sum 1_Q(m) 1_B(n) 1_S(m - n)`.
    pub qb: u64,
    /// `sum 1_Q(m) 1_Q(n) 1_S(m - n)`.
    pub qq: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub expansion: BigRational,
}

impl WeightedCountIdentity {
    pub fn agrees(&self) -> bool {
        self.direct == self.expansion
    }
}

pub fn weighted_count_identity(b: &PointSet, eps: &BigRational) -> Result<WeightedCountIdentity> {
    let f = balance_function(b)?;
    let qbox = f.aniso_box().clone();
    let window = window_length(qbox.m(), eps)?;
    let shifts = curve_window(window, qbox.k())?;
    let block = qbox.block();
    let g = f.scaled_values()?;
    let inside = b.indicator()?;
    let vol = f.volume_i128()?;

    // Direct: sum over s in S and n with n, n + s in Q_M.
    let mut direct = BigInt::zero();
    for s in &shifts {
        let mut acc: i128 = 0;
        for (idx, &gn) in g.iter().enumerate() {
            let n = block.point_at(idx);
            let m: Point = n.iter().zip(s).map(|(a, b)| a + b).collect();
            if let Some(j) = block.index_of(&m) {
                acc += gn * g[j];
            }
        }
        direct += BigInt::from(acc);
    }
    let direct = BigRational::new(direct, BigInt::from(vol) * BigInt::from(vol));

    let mut bb = 0u64;
    let mut bq = 0u64;
    let mut qb = 0u64;
    let mut qq = 0u64;
    for s in &shifts {
        for p in b.points() {
            let up: Point = p.iter().zip(s).map(|(a, b)| a + b).collect();
            let down: Point = p.iter().zip(s).map(|(a, b)| a - b).collect();
            if let Some(j) = block.index_of(&up) {
                qb += 1;
                if inside[j] {
                    bb += 1;
                }
            }
            if qbox.contains(&down) {
                bq += 1;
            }
        }
        qq += qbox
            .sides()
            .iter()
            .zip(s)
            .map(|(&side, &x)| (side - x).max(0) as u64)
            .product::<u64>();
    }
    let delta = f.delta().clone();
    let expansion =
        rational::int(bb) - &delta * rational::int(bq + qb) + &delta * &delta * rational::int(qq);
    Ok(WeightedCountIdentity {
        window,
        delta,
        direct,
        bb,
        bq,
        qb,
        qq,
        expansion,
    })
}

/// The weighted count evaluated on the spectral side of the embedding
/// group, together with the absolute-value form used in the lower bound
/// `int |f_B^|^2 |1_S^| >= delta |B| |S| / 4`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralCount {
    pub group: EmbeddingGroup,
    /// `(1 / prod T) sum_xi |f_B^(xi)|^2 1_S^(xi)` (real part).
    pub spectral: f64,
    /// Imaginary residue of the spectral sum (zero up to rounding).
    pub spectral_imag: f64,
    /// Exact direct value.
    #[serde(serialize_with = "rational::serialize")]
    pub direct: BigRational,
    /// `(1 / prod T) sum_xi |f_B^(xi)|^2 |1_S^(xi)|`.
    pub absolute_form: f64,
    /// `delta |B| |S| / 4`.
    pub quarter_bound: f64,
    /// Whether the direct count is at most `-delta |B| |S| / 4`.
    pub negative_hypothesis: bool,
    /// `absolute_form >= quarter_bound`.
    pub lower_bound_holds: bool,
    /// `|direct| <= absolute_form` (triangle inequality).
    pub triangle_holds: bool,
}

pub fn spectral_count(
    b: &PointSet,
    eps: &BigRational,
    group: Option<&EmbeddingGroup>,
) -> Result<SpectralCount> {
    let f = balance_function(b)?;
    let qbox = f.aniso_box().clone();
    let group = match group {
        Some(g) => g.clone(),
        None => EmbeddingGroup::for_box(&qbox, None)?,
    };
    let window = window_length(qbox.m(), eps)?;
    let curve = curve_window(window, qbox.k())?;
    for (axis, &t) in group.lengths().iter().enumerate() {
        if 2 * qbox.side(axis) as u128 > t as u128 + 1 {
            return Err(Error::Wraparound { axis });
        }
    }
    let spectrum = dft(&f.to_lattice_function()?, &group)?;
    let s_hat = curve_transform(&curve, &group)?;
    let n = spectrum.values().len() as f64;
    let prod: Vec<Complex64> = spectrum
        .values()
        .iter()
        .zip(&s_hat)
        .map(|(fv, sv)| fv.norm_sqr() * sv)
        .collect();
    let re: Vec<f64> = prod.iter().map(|c| c.re).collect();
    let im: Vec<f64> = prod.iter().map(|c| c.im).collect();
    let abs: Vec<f64> = spectrum
        .values()
        .iter()
        .zip(&s_hat)
        .map(|(fv, sv)| fv.norm_sqr() * sv.norm())
        .collect();
    let spectral = pairwise_sum(&re) / n;
    let absolute_form = pairwise_sum(&abs) / n;
    let direct = weighted_count_identity(b, eps)?.direct;
    let quarter = rational::to_f64(&f.delta) * b.len() as f64 * window as f64 / 4.0;
    let direct_f = rational::to_f64(&direct);
    let tol = 1e-9 * (1.0 + absolute_form.abs());
    Ok(SpectralCount {
        group,
        spectral,
        spectral_imag: pairwise_sum(&im) / n,
        negative_hypothesis: direct
            <= -(&f.delta * rational::int(b.len() as u64 * window) / rational::int(4)),
        direct,
        absolute_form,
        quarter_bound: quarter,
        lower_bound_holds: absolute_form + tol >= quarter,
        triangle_holds: direct_f.abs() <= absolute_form + tol,
    })
}

/// `1_S^` on the group for a finite set of points `S`.
pub fn curve_transform(points: &[Point], group: &EmbeddingGroup) -> Result<Vec<Complex64>> {
    let mut data = vec![Complex64::new(0.0, 0.0); group.size()?];
    for p in points {
        data[group.index_of(p)] += Complex64::new(1.0, 0.0);
    }
    NdFft::new(group.lengths()).forward(&mut data);
    Ok(data)
}
