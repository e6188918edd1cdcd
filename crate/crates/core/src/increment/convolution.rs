use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::advance;
use super::prefix::{run_hits, StridedPrefix};
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, PointSet, Sign};
use crate::rational;

/// The convolution `f_B * 1_Lambda` over its support `Q_M + Lambda`, split
/// into the interior `{m : m - Lambda in Q_M}` and the boundary layer.
#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionReport {
    pub grid: GridSpec,
    pub grid_size: u64,
    pub support: u64,
    pub interior: u64,
    pub boundary: u64,
    /// `sum_m f_B * 1_Lambda(m)`, exactly zero.
    #[serde(serialize_with = "rational::serialize")]
    pub mean: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub interior_sum: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub boundary_sum: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub total: BigRational,
    /// `-delta |Lambda| <= f_B * 1_Lambda(m)` on the interior.
    pub interior_lower_ok: bool,
    /// `f_B * 1_Lambda(m) <= delta sigma |Lambda|` on the interior.
    pub interior_upper_ok: bool,
    /// `8 k eta^2 sigma |Q_M|`.
    #[serde(serialize_with = "rational::serialize")]
    pub boundary_bound: BigRational,
    pub boundary_ok: bool,
    /// `3 sigma delta |B| |Lambda|^2`.
    #[serde(serialize_with = "rational::serialize")]
    pub total_bound: BigRational,
    pub total_ok: bool,
}

/// Exact `f_B * 1_Lambda` on every `m` of `Q_M + Lambda`, computed as
/// `|Q_M| f_B * 1_Lambda(m) = |Q_M| |B cap (m - Lambda)| - |B| |Q_M cap (m - Lambda)|`.
pub fn grid_convolution_bound(
    b: &PointSet,
    grid: &GridSpec,
    eta: &BigRational,
    sigma: &BigRational,
) -> Result<ConvolutionReport> {
    let qbox = b.aniso_box()?;
    let k = qbox.k();
    if grid.k() != k {
        return Err(Error::Geometry("grid and box dimensions differ".into()));
    }
    for j in 0..k {
        let (lo, hi) = grid.axis_bounds(j);
        if hi - lo + 1 > qbox.side(j) {
            return Err(Error::Geometry(format!(
                "grid extent on axis {j} exceeds the box side {}",
                qbox.side(j)
            )));
        }
    }
    let vol = qbox
        .volume()
        .to_i128()
        .ok_or(Error::Overflow("box volume"))?;
    let size = grid
        .cardinality()
        .to_i128()
        .ok_or(Error::Overflow("grid size"))?;
    let nb = b.len() as i128;
    let steps: Vec<i64> = (0..k).map(|j| grid.step(j)).collect();
    let table = StridedPrefix::new(b, &steps)?;

    // m - Lambda = (m - base) - sign (l_j q^j): a run in t = -sign l_j.
    let (t0, t1): (Vec<i64>, Vec<i64>) = (0..k)
        .map(|j| match grid.sign() {
            Sign::Minus => (1, grid.range(j)),
            Sign::Plus => (-grid.range(j), -1),
        })
        .unzip();
    let bounds: Vec<(i64, i64)> = (0..k).map(|j| grid.axis_bounds(j)).collect();
    let lo: Vec<i64> = bounds.iter().map(|b| 1 + b.0).collect();
    let hi: Vec<i64> = (0..k).map(|j| qbox.side(j) + bounds[j].1).collect();

    let mut m = lo.clone();
    let mut c = vec![0i64; k];
    let (mut support, mut interior) = (0u64, 0u64);
    let (mut mean, mut inner_sq, mut outer_sq) = (0i128, BigInt::zero(), BigInt::zero());
    let (mut lower_ok, mut upper_ok) = (true, true);
    // Interior checks in V-scaled integers: g = V conv.
    // g >= -|B| |Lambda| and g <= |B| sigma |Lambda|.
    let upper = rational::int(nb) * sigma * rational::int(size);
    loop {
        for j in 0..k {
            c[j] = m[j] - grid.base()[j];
        }
        let in_box: i128 = (0..k)
            .map(|j| run_hits(1, qbox.side(j), c[j], steps[j], t0[j], t1[j]) as i128)
            .product();
        if in_box > 0 {
            support += 1;
            let hits = table.count_run(&c, &t0, &t1) as i128;
            let g = vol * hits - nb * in_box;
            mean += g;
            let sq = BigInt::from(g) * BigInt::from(g);
            if in_box == size {
                interior += 1;
                inner_sq += sq;
                lower_ok &= g >= -nb * size;
                upper_ok &= rational::int(g) <= upper;
            } else {
                outer_sq += sq;
            }
        }
        if !advance(&mut m, &lo, &hi) {
            break;
        }
    }
    let v = BigInt::from(vol);
    let v2 = &v * &v;
    let interior_sum = BigRational::new(inner_sq, v2.clone());
    let boundary_sum = BigRational::new(outer_sq, v2);
    let total = &interior_sum + &boundary_sum;
    let delta = b.density();
    let boundary_bound = rational::int(8 * k as i64) * eta * eta * sigma * rational::int(vol);
    let total_bound = rational::int(3)
        * sigma
        * &delta
        * rational::int(nb)
        * rational::int(size)
        * rational::int(size);
    let boundary = support - interior;
    Ok(ConvolutionReport {
        grid: grid.clone(),
        grid_size: size as u64,
        support,
        interior,
        boundary,
        mean: BigRational::new(BigInt::from(mean), v),
        interior_lower_ok: lower_ok,
        interior_upper_ok: upper_ok,
        boundary_ok: rational::int(boundary) <= boundary_bound,
        boundary_bound,
        total_ok: total <= total_bound,
        total_bound,
        interior_sum,
        boundary_sum,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnisoBox;
    use crate::rational::ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn conv_direct(b: &PointSet, grid: &GridSpec, m: &[i64]) -> BigRational {
        let qbox = b.aniso_box().unwrap();
        let delta = b.density();
        grid.points()
            .map(|lam| {
                let p: Vec<i64> = m.iter().zip(&lam).map(|(x, y)| x - y).collect();
                if !qbox.contains(&p) {
                    BigRational::zero()
                } else if b.contains(&p) {
                    rational::int(1) - &delta
                } else {
                    -delta.clone()
                }
            })
            .sum()
    }

    #[test]
    fn full_box_convolution_vanishes() {
        let b = PointSet::full_box(AnisoBox::new(4, 2).unwrap()).unwrap();
        let grid = GridSpec::new(vec![0, 0], 1, 2, Sign::Minus).unwrap();
        let r = grid_convolution_bound(&b, &grid, &ratio(1, 2), &ratio(1, 10)).unwrap();
        assert!(r.total.is_zero());
        assert!(r.mean.is_zero());
    }

    #[test]
    fn sums_match_direct_evaluation() {
        let qbox = AnisoBox::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let block = qbox.block();
        let pts = (0..block.cells().unwrap())
            .map(|i| block.point_at(i))
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        let b = PointSet::in_box(qbox, pts).unwrap();
        for grid in [
            GridSpec::new(vec![0, 0], 2, 2, Sign::Minus).unwrap(),
            GridSpec::new(vec![1, -3], 1, 2, Sign::Plus).unwrap(),
        ] {
            let r = grid_convolution_bound(&b, &grid, &ratio(1, 2), &ratio(1, 10)).unwrap();
            assert!(r.mean.is_zero());
            let mut direct = BigRational::zero();
            for x in -20..=30 {
                for y in -40..=60 {
                    let v = conv_direct(&b, &grid, &[x, y]);
                    direct += &v * &v;
                }
            }
            assert_eq!(direct, r.total);
        }
    }

    #[test]
    fn boundary_count_small_case() {
        // M = 16, q = 1, L = 2: the support is 17 x 259 and the interior
        // 15 x 253.
        let b = PointSet::in_box(AnisoBox::new(16, 2).unwrap(), vec![vec![3, 3]]).unwrap();
        let grid = GridSpec::new(vec![0, 0], 1, 2, Sign::Minus).unwrap();
        let r = grid_convolution_bound(&b, &grid, &ratio(1, 2), &ratio(1, 10)).unwrap();
        assert_eq!(r.support, 17 * 259);
        assert_eq!(r.interior, 15 * 253);
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let b = PointSet::full_box(AnisoBox::new(2, 2).unwrap()).unwrap();
        let grid = GridSpec::new(vec![0, 0], 1, 3, Sign::Minus).unwrap();
        assert!(matches!(
            grid_convolution_bound(&b, &grid, &ratio(1, 2), &ratio(1, 10)),
            Err(Error::Geometry(_))
        ));
    }
}
