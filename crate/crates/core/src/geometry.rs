//! Anisotropic boxes, lattice point sets and arithmetic grids.
//!
//! The box `Q_M = [1,M] x [1,M^2] x ... x [1,M^k]` is the natural domain for
//! sets avoiding differences on the monomial curve `(d, d^2, ..., d^k)`: each
//! coordinate is scaled to the growth of the matching curve coordinate.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::error::{Error, Result};

/// A lattice point in `Z^k`.
pub type Point = Vec<i64>;

/// Largest dense array (in cells) any operation will allocate.
pub const DENSE_CELL_BUDGET: usize = 1 << 28;

/// The anisotropic box `[1,M] x [1,M^2] x ... x [1,M^k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnisoBox {
    m: u64,
    k: usize,
    sides: Vec<i64>,
}

impl AnisoBox {
    pub fn new(m: u64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidDimension(k));
        }
        if m == 0 {
            return Err(Error::param("M", "base side must be positive"));
        }
        let base = i64::try_from(m).map_err(|_| Error::Overflow("computing box sides"))?;
        let mut sides = Vec::with_capacity(k);
        let mut side: i64 = 1;
        for _ in 0..k {
            side = side
                .checked_mul(base)
                .ok_or(Error::Overflow("computing box sides"))?;
            sides.push(side);
        }
        Ok(AnisoBox { m, k, sides })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Side length `M^(axis+1)` of the zero-based `axis`.
    pub fn side(&self, axis: usize) -> i64 {
        self.sides[axis]
    }

    pub fn sides(&self) -> &[i64] {
        &self.sides
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.k && p.iter().zip(&self.sides).all(|(&x, &s)| 1 <= x && x <= s)
    }

    /// Exact volume `M^(k(k+1)/2)`.
    pub fn volume(&self) -> BigUint {
        box_volume(self)
    }

    pub fn block(&self) -> Block {
        Block::new(
            vec![1; self.k],
            self.sides.iter().map(|&s| s as u64).collect(),
        )
    }
}

/// Exact volume of `Q_M`, i.e. `M^(k(k+1)/2)`.
pub fn box_volume(b: &AnisoBox) -> BigUint {
    let exponent = (b.k * (b.k + 1) / 2) as u32;
    BigUint::from(b.m).pow(exponent)
}

/// Which region a [`PointSet`] lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// The anisotropic box `Q_M`.
    Box(AnisoBox),
    /// The signed cube `[-N', N']^k` used by the lifting reduction.
    Signed { half_width: i64, k: usize },
}

impl Geometry {
    pub fn signed(half_width: i64, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidDimension(k));
        }
        if half_width < 0 {
            return Err(Error::param("N'", "half width must be non-negative"));
        }
        Ok(Geometry::Signed { half_width, k })
    }

    pub fn k(&self) -> usize {
        match self {
            Geometry::Box(b) => b.k(),
            Geometry::Signed { k, .. } => *k,
        }
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        match self {
            Geometry::Box(b) => b.contains(p),
            Geometry::Signed { half_width, k } => {
                p.len() == *k && p.iter().all(|x| x.abs() <= *half_width)
            }
        }
    }

    pub fn volume(&self) -> BigUint {
        match self {
            Geometry::Box(b) => b.volume(),
            Geometry::Signed { half_width, k } => {
                BigUint::from((2 * *half_width + 1) as u64).pow(*k as u32)
            }
        }
    }

    pub fn block(&self) -> Block {
        match self {
            Geometry::Box(b) => b.block(),
            Geometry::Signed { half_width, k } => Block::new(
                vec![-*half_width; *k],
                vec![(2 * *half_width + 1) as u64; *k],
            ),
        }
    }

    /// The mode tag used in the point-set file header.
    pub fn mode(&self) -> &'static str {
        match self {
            Geometry::Box(_) => "box",
            Geometry::Signed { .. } => "signed",
        }
    }

    /// The size parameter written in the file header (`M` or `N'`).
    pub fn size_parameter(&self) -> u64 {
        match self {
            Geometry::Box(b) => b.m(),
            Geometry::Signed { half_width, .. } => *half_width as u64,
        }
    }
}

impl From<AnisoBox> for Geometry {
    fn from(b: AnisoBox) -> Self {
        Geometry::Box(b)
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Box(b) => write!(f, "box Q_{} (k={})", b.m(), b.k()),
            Geometry::Signed { half_width, k } => {
                write!(f, "signed box [-{half_width},{half_width}]^{k}")
            }
        }
    }
}

/// A rectangular block of lattice points with a row-major dense indexing
/// (axis 0 slowest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    lower: Vec<i64>,
    extent: Vec<u64>,
    strides: Vec<usize>,
}

impl Block {
    pub fn new(lower: Vec<i64>, extent: Vec<u64>) -> Self {
        assert_eq!(lower.len(), extent.len());
        let mut strides = vec![1usize; extent.len()];
        for axis in (0..extent.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1].saturating_mul(extent[axis + 1] as usize);
        }
        Block {
            lower,
            extent,
            strides,
        }
    }

    pub fn k(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn extent(&self) -> &[u64] {
        &self.extent
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Upper corner (inclusive) on `axis`.
    pub fn upper(&self, axis: usize) -> i64 {
        self.lower[axis] + self.extent[axis] as i64 - 1
    }

    /// Number of cells, failing when it exceeds [`DENSE_CELL_BUDGET`].
    pub fn cells(&self) -> Result<usize> {
        let mut n: usize = 1;
        for &e in &self.extent {
            n = n
                .checked_mul(e as usize)
                .filter(|&n| n <= DENSE_CELL_BUDGET)
                .ok_or_else(|| {
                    Error::ResourceLimit(format!(
                        "dense block of extent {:?} exceeds {} cells",
                        self.extent, DENSE_CELL_BUDGET
                    ))
                })?;
        }
        Ok(n)
    }

    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for axis in 0..self.k() {
            let off = p[axis] - self.lower[axis];
            if off < 0 || off as u64 >= self.extent[axis] {
                return None;
            }
            idx += off as usize * self.strides[axis];
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Point {
        let mut p = vec![0; self.k()];
        for axis in 0..self.k() {
            let off = idx / self.strides[axis];
            idx %= self.strides[axis];
            p[axis] = self.lower[axis] + off as i64;
        }
        p
    }
}

/// A finite, sorted, duplicate-free set of lattice points inside a
/// [`Geometry`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    geometry: Geometry,
    points: Vec<Point>,
}

impl PointSet {
    /// Builds a set, sorting and deduplicating `points`. Every point must
    /// lie in `geometry`.
    pub fn new(geometry: Geometry, mut points: Vec<Point>) -> Result<Self> {
        for p in &points {
            if !geometry.contains(p) {
                return Err(Error::PointOutsideGeometry {
                    point: p.clone(),
                    geometry: geometry.to_string(),
                });
            }
        }
        points.sort_unstable();
        points.dedup();
        Ok(PointSet { geometry, points })
    }

    pub fn in_box(b: AnisoBox, points: Vec<Point>) -> Result<Self> {
        PointSet::new(Geometry::Box(b), points)
    }

    pub fn empty(geometry: Geometry) -> Self {
        PointSet {
            geometry,
            points: Vec::new(),
        }
    }

    /// The whole box `Q_M`.
    pub fn full_box(b: AnisoBox) -> Result<Self> {
        let block = b.block();
        let n = block.cells()?;
        let points = (0..n).map(|i| block.point_at(i)).collect();
        Ok(PointSet {
            geometry: Geometry::Box(b),
            points,
        })
    }

    /// Builds a set from a dense indicator over the geometry's block.
    pub fn from_indicator(geometry: Geometry, indicator: &[bool]) -> Self {
        let block = geometry.block();
        let points = indicator
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| block.point_at(i))
            .collect();
        PointSet { geometry, points }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// The enclosing box, or a geometry error in signed mode.
    pub fn aniso_box(&self) -> Result<&AnisoBox> {
        match &self.geometry {
            Geometry::Box(b) => Ok(b),
            other => Err(Error::Geometry(format!(
                "operation requires a set in Q_M, found {other}"
            ))),
        }
    }

    pub fn k(&self) -> usize {
        self.geometry.k()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.points.len())
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.points
            .binary_search_by(|q| q.as_slice().cmp(p))
            .is_ok()
    }

    /// Exact density `|B| / |geometry|`.
    pub fn density(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.points.len()),
            BigInt::from(self.geometry.volume()),
        )
    }

    /// Dense indicator over the geometry's block.
    pub fn indicator(&self) -> Result<Vec<bool>> {
        let block = self.geometry.block();
        let mut out = vec![false; block.cells()?];
        for p in &self.points {
            // Points are validated on construction.
            out[block.index_of(p).expect("point inside geometry")] = true;
        }
        Ok(out)
    }

    /// Reflection through the centre of the box: `p_j -> M^j + 1 - p_j`
    /// (or `p -> -p` in signed mode).
    pub fn reflect(&self) -> PointSet {
        let points = match &self.geometry {
            Geometry::Box(b) => self
                .points
                .iter()
                .map(|p| p.iter().zip(b.sides()).map(|(x, s)| s + 1 - x).collect())
                .collect(),
            Geometry::Signed { .. } => self
                .points
                .iter()
                .map(|p| p.iter().map(|x| -x).collect())
                .collect(),
        };
        let mut out = PointSet {
            geometry: self.geometry.clone(),
            points,
        };
        out.points.sort_unstable();
        out
    }

    /// Translates a signed-mode set into the smallest box `Q_M` that holds
    /// the translate `p + (N'+1, ..., N'+1)`. Monomial differences are
    /// translation invariant, so `B - B` is unchanged.
    pub fn translate_into_box(&self) -> Result<PointSet> {
        match &self.geometry {
            Geometry::Box(_) => Ok(self.clone()),
            Geometry::Signed { half_width, k } => {
                let shift = half_width + 1;
                let need = (2 * half_width + 1) as u64;
                // Smallest M with M >= 2N'+1 covers every axis since M^j >= M.
                let b = AnisoBox::new(need.max(1), *k)?;
                let points = self
                    .points
                    .iter()
                    .map(|p| p.iter().map(|x| x + shift).collect())
                    .collect();
                PointSet::in_box(b, points)
            }
        }
    }
}

/// Orientation of the grid increments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i64(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::param(
                "sign",
                format!("expected +1 or -1, got {other}"),
            )),
        }
    }
}

/// The arithmetic grid `{ m + sign*(l_1 q, l_2 q^2, ..., l_k q^k) : l in Q_L }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    base: Point,
    q: u64,
    l: u64,
    sign: Sign,
    steps: Vec<i64>,
    ranges: Vec<i64>,
}

impl GridSpec {
    pub fn new(base: Point, q: u64, l: u64, sign: Sign) -> Result<Self> {
        let k = base.len();
        if k < 2 {
            return Err(Error::InvalidDimension(k));
        }
        if q == 0 {
            return Err(Error::param("q", "modulus must be positive"));
        }
        if l == 0 {
            return Err(Error::param("L", "side must be positive"));
        }
        let qi = i64::try_from(q).map_err(|_| Error::Overflow("computing grid steps"))?;
        let li = i64::try_from(l).map_err(|_| Error::Overflow("computing grid ranges"))?;
        let mut steps = Vec::with_capacity(k);
        let mut ranges = Vec::with_capacity(k);
        let (mut s, mut r) = (1i64, 1i64);
        for _ in 0..k {
            s = s
                .checked_mul(qi)
                .ok_or(Error::Overflow("computing grid steps"))?;
            r = r
                .checked_mul(li)
                .ok_or(Error::Overflow("computing grid ranges"))?;
            steps.push(s);
            ranges.push(r);
        }
        // The far corner must be representable.
        for axis in 0..k {
            steps[axis]
                .checked_mul(ranges[axis])
                .and_then(|x| x.checked_add(base[axis].abs()))
                .ok_or(Error::Overflow("computing grid extent"))?;
        }
        Ok(GridSpec {
            base,
            q,
            l,
            sign,
            steps,
            ranges,
        })
    }

    pub fn k(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[i64] {
        &self.base
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `q^(axis+1)`.
    pub fn step(&self, axis: usize) -> i64 {
        self.steps[axis]
    }

    /// `L^(axis+1)`, the number of values of `l_axis`.
    pub fn range(&self, axis: usize) -> i64 {
        self.ranges[axis]
    }

    /// `|Lambda| = L^(k(k+1)/2)`.
    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.l).pow((self.k() * (self.k() + 1) / 2) as u32)
    }

    /// The grid point with coordinates `ell` (each `1 <= ell_j <= L^j`).
    pub fn point(&self, ell: &[i64]) -> Point {
        let s = self.sign.as_i64();
        (0..self.k())
            .map(|j| self.base[j] + s * ell[j] * self.steps[j])
            .collect()
    }

    /// Inverts [`GridSpec::point`]: the unique `ell` mapping to `p`, if any.
    pub fn coordinates_of(&self, p: &[i64]) -> Option<Point> {
        if p.len() != self.k() {
            return None;
        }
        let s = self.sign.as_i64();
        let mut ell = Vec::with_capacity(self.k());
        for j in 0..self.k() {
            let diff = s * (p[j] - self.base[j]);
            if diff % self.steps[j] != 0 {
                return None;
            }
            let lj = diff / self.steps[j];
            if lj < 1 || lj > self.ranges[j] {
                return None;
            }
            ell.push(lj);
        }
        Some(ell)
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.coordinates_of(p).is_some()
    }

    /// Inclusive bounding interval of the grid on `axis`.
    pub fn axis_bounds(&self, axis: usize) -> (i64, i64) {
        let a = self.base[axis] + self.sign.as_i64() * self.steps[axis];
        let b = self.base[axis] + self.sign.as_i64() * self.steps[axis] * self.ranges[axis];
        (a.min(b), a.max(b))
    }

    /// True when every grid point lies in `b`.
    pub fn fits_in(&self, b: &AnisoBox) -> bool {
        self.k() == b.k()
            && (0..self.k()).all(|j| {
                let (lo, hi) = self.axis_bounds(j);
                lo >= 1 && hi <= b.side(j)
            })
    }

    /// Iterates over the `ell` coordinates in lexicographic order.
    pub fn coordinates(&self) -> impl Iterator<Item = Point> + '_ {
        let k = self.k();
        let mut cur: Option<Point> = Some(vec![1; k]);
        std::iter::from_fn(move || {
            let out = cur.clone()?;
            let mut next = out.clone();
            let mut axis = k;
            loop {
                if axis == 0 {
                    cur = None;
                    break;
                }
                axis -= 1;
                if next[axis] < self.ranges[axis] {
                    next[axis] += 1;
                    for later in next.iter_mut().skip(axis + 1) {
                        *later = 1;
                    }
                    cur = Some(next);
                    break;
                }
            }
            Some(out)
        })
    }

    /// Iterates over the grid points in `ell`-lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.coordinates().map(move |ell| self.point(&ell))
    }
}

/// Lists every point of the grid, sorted. Nothing is clipped: points outside
/// any box are kept (clip with [`clip_to_box`]).
pub fn enumerate_grid(grid: &GridSpec) -> Result<Vec<Point>> {
    let card = grid.cardinality();
    if card > BigUint::from(DENSE_CELL_BUDGET) {
        return Err(Error::ResourceLimit(format!(
            "grid has {card} points, above the enumeration budget"
        )));
    }
    let mut pts: Vec<Point> = grid.points().collect();
    pts.sort_unstable();
    Ok(pts)
}

/// Keeps the points that lie in `b`.
pub fn clip_to_box(points: &[Point], b: &AnisoBox) -> Result<PointSet> {
    PointSet::in_box(
        b.clone(),
        points.iter().filter(|p| b.contains(p)).cloned().collect(),
    )
}
