use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::Serialize;

use super::advance;
use super::prefix::StridedPrefix;
use crate::error::{Error, Result};
use crate::geometry::{AnisoBox, Block, Point, PointSet};
use crate::rational;

/// The densest cell `c + Q_M` of `[1,N]^k`, recentred into `Q_M`.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionOutcome {
    #[serde(skip)]
    pub set: PointSet,
    #[serde(rename = "M")]
    pub m: u64,
    /// Lower corner of the chosen cell in `[1,N]^k`.
    pub corner: Point,
    pub captured: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub delta: BigRational,
    /// `|B| / N^k`.
    #[serde(serialize_with = "rational::serialize")]
    pub average: BigRational,
    /// `|B| / (prod_j ceil(N / M^j) |Q_M|)`, the pigeonhole floor for the
    /// tiling with cells flush against the far faces.
    #[serde(serialize_with = "rational::serialize")]
    pub guaranteed: BigRational,
}

/// `floor(n^(1/k))`.
pub fn integer_root(n: u64, k: usize) -> u64 {
    let mut m = (n as f64).powf(1.0 / k as f64).round() as u64;
    let pow = |x: u64| (x as u128).checked_pow(k as u32);
    while m > 0 && pow(m).is_none_or(|p| p > n as u128) {
        m -= 1;
    }
    while pow(m + 1).is_some_and(|p| p <= n as u128) {
        m += 1;
    }
    m
}

/// Cuts `[1,N]^k` into cells `M x M^2 x ... x M^k` with `M = floor(N^(1/k))`
/// and returns the translate `c + Q_M` (anywhere inside `[1,N]^k`) that
/// captures the most points of `B`; ties go to the lexicographically least
/// corner.
pub fn partition_reduce(points: &[Point], n: u64, k: usize) -> Result<PartitionOutcome> {
    if k < 2 {
        return Err(Error::InvalidDimension(k));
    }
    if (n as u128) < (1u128 << k) {
        return Err(Error::DegeneratePartition { n, k });
    }
    let outer = Block::new(vec![1; k], vec![n; k]);
    let mut counts = vec![0u32; outer.cells()?];
    for p in points {
        let idx = outer
            .index_of(p)
            .ok_or_else(|| Error::PointOutsideGeometry {
                point: p.clone(),
                geometry: format!("[1,{n}]^{k}"),
            })?;
        counts[idx] = 1;
    }
    let total = counts.iter().filter(|&&c| c > 0).count();
    let m = integer_root(n, k);
    let qbox = AnisoBox::new(m, k)?;
    let sides = qbox.sides().to_vec();
    let table = StridedPrefix::from_counts(outer, counts, &vec![1; k]);

    let t0 = vec![1i64; k];
    let positions: Vec<i64> = sides.iter().map(|&s| n as i64 - s + 1).collect();
    let mut corner = vec![1i64; k];
    let mut best: Option<(u64, Point)> = None;
    loop {
        let base: Point = corner.iter().map(|c| c - 1).collect();
        let c = table.count_run(&base, &t0, &sides);
        if best.as_ref().is_none_or(|(b, _)| c > *b) {
            best = Some((c, corner.clone()));
        }
        if !advance(&mut corner, &t0, &positions) {
            break;
        }
    }
    let (captured, corner) = best.expect("at least one window");
    let inside: Vec<Point> = points
        .iter()
        .filter(|p| (0..k).all(|j| p[j] >= corner[j] && p[j] < corner[j] + sides[j]))
        .map(|p| (0..k).map(|j| p[j] - corner[j] + 1).collect())
        .collect();
    let set = PointSet::in_box(qbox.clone(), inside)?;
    let cells: BigUint = sides
        .iter()
        .map(|&s| BigUint::from(n.div_ceil(s as u64)))
        .product();
    let guaranteed = BigRational::new(BigInt::from(total), BigInt::from(cells * qbox.volume()));
    Ok(PartitionOutcome {
        delta: set.density(),
        set,
        m,
        corner,
        captured,
        average: BigRational::new(
            BigInt::from(total),
            BigInt::from(BigUint::from(n).pow(k as u32)),
        ),
        guaranteed,
    })
}
