use crate::error::Result;
use crate::geometry::{Block, GridSpec, PointSet, Sign};

/// Strided prefix sums `P(x) = sum { A(y) : y <= x, y = x mod s }` of a set's
/// indicator, with steps `s_j` per axis. Counting the set on any grid with
/// those steps costs `2^k` lookups.
pub struct StridedPrefix {
    block: Block,
    steps: Vec<i64>,
    data: Vec<u32>,
}

impl StridedPrefix {
    pub fn new(set: &PointSet, steps: &[i64]) -> Result<Self> {
        let data = set.indicator()?.into_iter().map(u32::from).collect();
        Ok(Self::from_counts(set.geometry().block(), data, steps))
    }

    /// Table over `block` from dense per-cell counts (row-major).
    pub fn from_counts(block: Block, mut data: Vec<u32>, steps: &[i64]) -> Self {
        let strides = block.strides().to_vec();
        for axis in 0..block.k() {
            let s = steps[axis];
            let extent = block.extent()[axis] as i64;
            if s >= extent {
                continue;
            }
            let jump = s as usize * strides[axis];
            let axis_len = strides[axis] * extent as usize;
            // Within each slab along `axis`, entries at offset >= jump pull from
            // the entry one step earlier.
            for slab in data.chunks_mut(axis_len) {
                for i in jump..slab.len() {
                    slab[i] += slab[i - jump];
                }
            }
        }
        StridedPrefix {
            block,
            steps: steps.to_vec(),
            data,
        }
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    /// `P(x)`, with coordinates above the block pulled back into it along
    /// their residue class.
    fn prefix(&self, x: &mut [i64]) -> u32 {
        for axis in 0..x.len() {
            let lo = self.block.lower()[axis];
            let hi = self.block.upper(axis);
            let s = self.steps[axis];
            if x[axis] > hi {
                x[axis] -= (x[axis] - hi + s - 1) / s * s;
            }
            if x[axis] < lo {
                return 0;
            }
        }
        self.data[self.block.index_of(x).expect("clamped into block")]
    }

    /// `|B cap {c + (t_1 s_1, ..., t_k s_k) : t0_j <= t_j <= t1_j}|`.
    pub fn count_run(&self, c: &[i64], t0: &[i64], t1: &[i64]) -> u64 {
        let k = c.len();
        let mut total: i64 = 0;
        let mut corner = vec![0i64; k];
        for mask in 0..(1u32 << k) {
            for axis in 0..k {
                let t = if mask >> axis & 1 == 1 {
                    t0[axis] - 1
                } else {
                    t1[axis]
                };
                corner[axis] = c[axis] + t * self.steps[axis];
            }
            let v = self.prefix(&mut corner) as i64;
            if mask.count_ones() % 2 == 1 {
                total -= v;
            } else {
                total += v;
            }
        }
        total as u64
    }

    /// `|B cap Lambda|` for a grid whose steps match this table.
    pub fn grid_count(&self, grid: &GridSpec) -> u64 {
        let k = grid.k();
        let (t0, t1): (Vec<i64>, Vec<i64>) = (0..k)
            .map(|axis| match grid.sign() {
                Sign::Plus => (1, grid.range(axis)),
                Sign::Minus => (-grid.range(axis), -1),
            })
            .unzip();
        self.count_run(grid.base(), &t0, &t1)
    }
}

/// `|[lo, hi] cap {c + t s : t0 <= t <= t1}|`.
pub fn run_hits(lo: i64, hi: i64, c: i64, s: i64, t0: i64, t1: i64) -> i64 {
    // t with lo <= c + t s <= hi.
    let a = (lo - c).div_euclid(s) + i64::from((lo - c).rem_euclid(s) != 0);
    let b = (hi - c).div_euclid(s);
    (b.min(t1) - a.max(t0) + 1).max(0)
}
