use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::advance;
use super::prefix::StridedPrefix;
use super::spectral::{contradiction_report, ContradictionReport};
use crate::constants::{Calibrated, LabConstants};
use crate::diffset::{randomness_defect, RandomnessDefect};
use crate::error::{Error, Result};
use crate::geometry::{AnisoBox, GridSpec, PointSet, Sign};
use crate::rational;

/// A grid on which `B` is denser than `delta (1 + sigma)`.
#[derive(Clone, Debug, Serialize)]
pub struct GridHit {
    pub grid: GridSpec,
    pub count: u64,
    pub size: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub density_on_grid: BigRational,
    /// `delta (1 + sigma)`.
    #[serde(serialize_with = "rational::serialize")]
    pub required: BigRational,
}

/// `L_q = ceil(eta^2 sigma M / q)`, the least side with `q L >= eta^2 sigma M`.
pub fn grid_side(eta: &BigRational, sigma: &BigRational, m: u64, q: u64) -> Result<u64> {
    let target = eta * eta * sigma * rational::int(m) / rational::int(q);
    Ok(rational::ceil_i64(&target)?.max(1) as u64)
}

/// Inclusive base range `[1 - q^j, M^j - (L q)^j]` on each axis for grids
/// `m + (l_1 q, ..., l_k q^k)` inside `Q_M`, or `None` if one is empty.
pub fn base_ranges(qbox: &AnisoBox, q: u64, l: u64) -> Option<(Vec<i64>, Vec<i64>)> {
    let mut lo = Vec::with_capacity(qbox.k());
    let mut hi = Vec::with_capacity(qbox.k());
    let (q, l) = (q as i128, l as i128);
    let (mut qj, mut lqj) = (1i128, 1i128);
    for axis in 0..qbox.k() {
        qj = qj.checked_mul(q)?;
        lqj = lqj.checked_mul(l * q)?;
        let a = 1 - qj;
        let b = qbox.side(axis) as i128 - lqj;
        if a > b {
            return None;
        }
        lo.push(a.try_into().ok()?);
        hi.push(b.try_into().ok()?);
    }
    Some((lo, hi))
}

/// The least base (lexicographically) whose grid with modulus `q` and side
/// `l` holds more than `threshold` points of `B`.
fn scan_modulus(
    b: &PointSet,
    qbox: &AnisoBox,
    q: u64,
    l: u64,
    threshold: &BigRational,
) -> Result<Option<(GridSpec, u64)>> {
    let Some((lo, hi)) = base_ranges(qbox, q, l) else {
        return Ok(None);
    };
    let k = qbox.k();
    let probe = GridSpec::new(lo.clone(), q, l, Sign::Plus)?;
    let steps: Vec<i64> = (0..k).map(|j| probe.step(j)).collect();
    let t0 = vec![1i64; k];
    let t1: Vec<i64> = (0..k).map(|j| probe.range(j)).collect();
    let table = StridedPrefix::new(b, &steps)?;
    let floor = threshold.floor().to_integer().to_u64().unwrap_or(u64::MAX);
    let hit = (lo[0]..=hi[0]).into_par_iter().find_map_first(|first| {
        let mut base = lo.clone();
        base[0] = first;
        let mut lo_rest = lo.clone();
        lo_rest[0] = first;
        let mut hi_rest = hi.clone();
        hi_rest[0] = first;
        loop {
            let c = table.count_run(&base, &t0, &t1);
            if c > floor {
                return Some((base, c));
            }
            if !advance(&mut base, &lo_rest, &hi_rest) {
                return None;
            }
        }
    });
    match hit {
        Some((base, c)) => Ok(Some((GridSpec::new(base, q, l, Sign::Plus)?, c))),
        None => Ok(None),
    }
}

/// Scans grids `m + (l_1 q, ..., l_k q^k)` inside `Q_M` for `q = 1, 2, ...,
/// floor(eta^-k)` with side `L_q` and returns the first (least `q`, then
/// least base) with `|B cap Lambda| > delta (1 + sigma) |Lambda|`.
///
/// Moduli whose grid does not fit in `Q_M` are skipped; if none fits the
/// search space is empty and a resolution error is returned.
pub fn find_increment_grid(
    b: &PointSet,
    sigma: &BigRational,
    consts: &LabConstants,
) -> Result<Option<GridHit>> {
    if b.is_empty() {
        return Err(Error::UndefinedDensity);
    }
    let qbox = b.aniso_box()?;
    let cal = consts.calibrate(&b.density())?;
    let q_max = cal.q_max(qbox.k())?;
    let sides = candidate_moduli(&cal.eta, sigma, qbox.m(), q_max)?;
    if sides
        .iter()
        .all(|&(q, l)| base_ranges(qbox, q, l).is_none())
    {
        return Err(Error::ResolutionTooCoarse(format!(
            "no grid with q <= {q_max} and q L >= eta^2 sigma M fits in Q_{}",
            qbox.m()
        )));
    }
    search_sides(b, qbox, &cal.delta, sigma, &sides)
}

/// The moduli worth scanning, with their sides. A grid with `q >= M` fits
/// only when `L_q = 1`, and all such grids are the single points of `Q_M`,
/// so beyond `M - 1` only the least `q >= M` with `L_q = 1` is kept.
fn candidate_moduli(
    eta: &BigRational,
    sigma: &BigRational,
    m: u64,
    q_max: u64,
) -> Result<Vec<(u64, u64)>> {
    let mut sides: Vec<(u64, u64)> = (1..=q_max.min(m.saturating_sub(1)))
        .map(|q| Ok((q, grid_side(eta, sigma, m, q)?)))
        .collect::<Result<_>>()?;
    let unit = rational::ceil_i64(&(eta * eta * sigma * rational::int(m)))?.max(1) as u64;
    let q_star = unit.max(m);
    if q_star <= q_max {
        sides.push((q_star, grid_side(eta, sigma, m, q_star)?));
    }
    Ok(sides)
}

fn search_sides(
    b: &PointSet,
    qbox: &AnisoBox,
    delta: &BigRational,
    sigma: &BigRational,
    sides: &[(u64, u64)],
) -> Result<Option<GridHit>> {
    let required = delta * (BigRational::one() + sigma);
    let found = sides
        .par_iter()
        .map(|&(q, l)| {
            let size = BigUint::from(l).pow((qbox.k() * (qbox.k() + 1) / 2) as u32);
            let threshold = &required * BigRational::from_integer(BigInt::from(size));
            scan_modulus(b, qbox, q, l, &threshold)
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    let Some(found) = found else {
        return Ok(None);
    };
    let Some((grid, count)) = found? else {
        return Ok(None);
    };
    let size = grid
        .cardinality()
        .to_u64()
        .ok_or(Error::Overflow("grid size"))?;
    Ok(Some(GridHit {
        density_on_grid: rational::ratio(count as i64, size as i64),
        grid,
        count,
        size,
        required,
    }))
}

/// `|B'|` for `B' = B cap prod_j (eps M^j, (1 - eps) M^j]`.
pub fn interior_count(b: &PointSet, eps: &BigRational) -> Result<u64> {
    let qbox = b.aniso_box()?;
    let bounds: Vec<(BigRational, BigRational)> = qbox
        .sides()
        .iter()
        .map(|&s| {
            let s = rational::int(s);
            (eps * &s, (BigRational::one() - eps) * s)
        })
        .collect();
    Ok(b.points()
        .iter()
        .filter(|p| {
            p.iter().zip(&bounds).all(|(&x, (lo, hi))| {
                let x = rational::int(x);
                &x > lo && &x <= hi
            })
        })
        .count() as u64)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum DichotomyOutcome {
    Random {
        count: u64,
        #[serde(serialize_with = "rational::serialize")]
        threshold: BigRational,
    },
    Structured {
        grid: GridSpec,
        count: u64,
        #[serde(serialize_with = "rational::serialize")]
        density_on_grid: BigRational,
        #[serde(serialize_with = "rational::serialize")]
        required: BigRational,
        /// `L >= delta^(k+2) sigma M`.
        l_condition_ok: bool,
        /// Found by the `q = 1`, `L = ceil(eps M)` scan after `|B'| < 3|B|/4`.
        fallback: bool,
    },
    Undecided {
        diagnostics: Box<UndecidedDiagnostics>,
    },
}

impl DichotomyOutcome {
    pub fn kind(&self) -> &'static str {
        match self {
            DichotomyOutcome::Random { .. } => "random",
            DichotomyOutcome::Structured { .. } => "structured",
            DichotomyOutcome::Undecided { .. } => "undecided",
        }
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        match self {
            DichotomyOutcome::Structured { grid, .. } => Some(grid),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UndecidedDiagnostics {
    pub defect: RandomnessDefect,
    pub interior: u64,
    pub size: u64,
    /// The spectral tables, or why they could not be computed.
    pub spectral: std::result::Result<ContradictionReport, String>,
}

/// Random, structured, or neither.
pub fn dichotomy(b: &PointSet, consts: &LabConstants) -> Result<DichotomyOutcome> {
    let defect = randomness_defect(b, consts)?;
    if defect.is_random {
        return Ok(DichotomyOutcome::Random {
            count: defect.count,
            threshold: defect.threshold,
        });
    }
    let qbox = b.aniso_box()?;
    let cal = consts.calibrate(&b.density())?;
    let hit = match find_increment_grid(b, &cal.sigma, consts) {
        Ok(hit) => hit,
        Err(Error::ResolutionTooCoarse(_)) => None,
        Err(e) => return Err(e),
    };
    if let Some(hit) = hit {
        return Ok(structured(hit, qbox, &cal, false));
    }
    let interior = interior_count(b, &consts.eps)?;
    if 4 * interior < 3 * b.len() as u64 {
        let l = rational::ceil_i64(&(&consts.eps * rational::int(qbox.m())))?.max(1) as u64;
        if let Some(hit) = search_sides(b, qbox, &cal.delta, &cal.sigma, &[(1, l)])? {
            return Ok(structured(hit, qbox, &cal, true));
        }
    }
    let spectral =
        contradiction_report(b, consts, super::spectral::DEFAULT_Q_CAP).map_err(|e| e.to_string());
    Ok(DichotomyOutcome::Undecided {
        diagnostics: Box::new(UndecidedDiagnostics {
            defect,
            interior,
            size: b.len() as u64,
            spectral,
        }),
    })
}

fn structured(hit: GridHit, qbox: &AnisoBox, cal: &Calibrated, fallback: bool) -> DichotomyOutcome {
    let k = qbox.k();
    let floor = rational::pow(&cal.delta, k + 2) * &cal.sigma * rational::int(qbox.m());
    DichotomyOutcome::Structured {
        l_condition_ok: rational::int(hit.grid.l()) >= floor,
        grid: hit.grid,
        count: hit.count,
        density_on_grid: hit.density_on_grid,
        required: hit.required,
        fallback,
    }
}

/// Whether every grid in the search space has density at most
/// `delta (1 + sigma)`.
pub fn is_regular(b: &PointSet, consts: &LabConstants) -> Result<bool> {
    let cal = consts.calibrate(&b.density())?;
    Ok(find_increment_grid(b, &cal.sigma, consts)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnisoBox;
    use crate::rational::ratio;

    fn planted(m: u64, grid: &GridSpec) -> PointSet {
        let qbox = AnisoBox::new(m, 2).unwrap();
        PointSet::in_box(qbox, grid.points().collect()).unwrap()
    }

    #[test]
    fn full_box_has_no_increment() {
        let lab = LabConstants::new(2).unwrap().with_eta(ratio(1, 2)).unwrap();
        let b = PointSet::full_box(AnisoBox::new(8, 2).unwrap()).unwrap();
        assert!(find_increment_grid(&b, &ratio(1, 4), &lab)
            .unwrap()
            .is_none());
    }

    #[test]
    fn planted_grid_is_found() {
        let lab = LabConstants::new(2)
            .unwrap()
            .with_eta(ratio(1, 2))
            .unwrap()
            .with_sigma(ratio(1, 2))
            .unwrap();
        let grid = GridSpec::new(vec![3, 10], 2, 2, Sign::Plus).unwrap();
        let b = planted(32, &grid);
        let hit = find_increment_grid(&b, &ratio(1, 2), &lab)
            .unwrap()
            .unwrap();
        assert!(hit.density_on_grid > hit.required);
        assert_eq!(hit.grid.q(), 1);
        assert!(hit.count >= 1);
    }

    #[test]
    fn coarse_resolution_is_an_error() {
        let lab = LabConstants::new(2).unwrap().with_eta(ratio(1, 1)).unwrap();
        let b = PointSet::in_box(AnisoBox::new(4, 2).unwrap(), vec![vec![1, 1]]).unwrap();
        assert!(matches!(
            find_increment_grid(&b, &ratio(2, 1), &lab),
            Err(Error::ResolutionTooCoarse(_))
        ));
    }

    #[test]
    fn base_ranges_fit_exactly() {
        let qbox = AnisoBox::new(8, 2).unwrap();
        let (lo, hi) = base_ranges(&qbox, 2, 3).unwrap();
        for base in [lo.clone(), hi.clone()] {
            assert!(GridSpec::new(base, 2, 3, Sign::Plus)
                .unwrap()
                .fits_in(&qbox));
        }
        let mut below = lo.clone();
        below[0] -= 1;
        assert!(!GridSpec::new(below, 2, 3, Sign::Plus)
            .unwrap()
            .fits_in(&qbox));
        assert!(base_ranges(&qbox, 3, 3).is_none());
    }

    #[test]
    fn full_box_dichotomy_is_random() {
        let lab = LabConstants::new(2).unwrap();
        let b = PointSet::full_box(AnisoBox::new(8, 2).unwrap()).unwrap();
        assert_eq!(dichotomy(&b, &lab).unwrap().kind(), "random");
    }

    #[test]
    fn single_point_is_structured_at_default_constants() {
        let lab = LabConstants::new(2).unwrap();
        let b = PointSet::in_box(AnisoBox::new(2, 2).unwrap(), vec![vec![1, 1]]).unwrap();
        let out = dichotomy(&b, &lab).unwrap();
        assert_eq!(out.kind(), "structured");
        assert_eq!(out.grid().unwrap().l(), 1);
    }

    #[test]
    fn capped_moduli_match_the_full_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let lab = LabConstants::new(2).unwrap().with_eta(ratio(1, 3)).unwrap();
        for trial in 0..12 {
            let qbox = AnisoBox::new(6, 2).unwrap();
            let block = qbox.block();
            let p = [0.05, 0.2, 0.5][trial % 3];
            let pts: Vec<_> = (0..block.cells().unwrap())
                .map(|i| block.point_at(i))
                .filter(|_| rng.gen_bool(p))
                .collect();
            if pts.is_empty() {
                continue;
            }
            let b = PointSet::in_box(qbox.clone(), pts).unwrap();
            let cal = lab.calibrate(&b.density()).unwrap();
            for sigma in [ratio(1, 10), ratio(3, 1), ratio(40, 1)] {
                let q_max = cal.q_max(2).unwrap();
                let full: Vec<(u64, u64)> = (1..=q_max)
                    .map(|q| (q, grid_side(&cal.eta, &sigma, 6, q).unwrap()))
                    .collect();
                let want = search_sides(&b, &qbox, &cal.delta, &sigma, &full).unwrap();
                let got = match find_increment_grid(&b, &sigma, &lab) {
                    Err(Error::ResolutionTooCoarse(_)) => None,
                    r => r.unwrap(),
                };
                assert_eq!(
                    want.map(|h| (h.grid.point(&[1, 1]), h.count)),
                    got.map(|h| (h.grid.point(&[1, 1]), h.count))
                );
            }
        }
    }

    #[test]
    fn very_sparse_set_finishes() {
        let b = PointSet::in_box(
            AnisoBox::new(16, 2).unwrap(),
            vec![vec![1, 1], vec![9, 200]],
        )
        .unwrap();
        let out = dichotomy(&b, &LabConstants::new(2).unwrap()).unwrap();
        assert_eq!(out.kind(), "structured");
    }
}
