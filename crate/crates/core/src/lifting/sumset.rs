use serde::Serialize;

use crate::diffset::IntSet;
use crate::error::{Error, Result};

/// `D = B cap (m - A)` for the `m in [2, 2N]` maximizing `|D|`.
#[derive(Clone, Debug, Serialize)]
pub struct SumsetReduction {
    pub m: i64,
    pub d_set: Vec<i64>,
    pub size: u64,
    /// `ceil(|A| |B| / (2N - 1))`.
    pub pigeonhole_bound: u64,
    /// `sum_m |B cap (m - A)|`, which equals `|A| |B|`.
    pub fiber_total: u64,
    /// `D - D` lies in `A + B - m`.
    pub containment_ok: bool,
}

pub fn sumset_reduce(a: &[i64], b: &[i64], n: i64) -> Result<SumsetReduction> {
    let a = IntSet::new(n, a.to_vec())?;
    let b = IntSet::new(n, b.to_vec())?;
    if a.elems().is_empty() || b.elems().is_empty() {
        return Err(Error::ReductionDegenerate(
            "A and B must be non-empty".into(),
        ));
    }
    let mut fibers = vec![0u64; (2 * n + 1) as usize];
    for &x in a.elems() {
        for &y in b.elems() {
            fibers[(x + y) as usize] += 1;
        }
    }
    let fiber_total = fibers.iter().sum();
    let (m, _) = (2..=2 * n).fold((2, 0), |(bm, bc), m| {
        let c = fibers[m as usize];
        if c > bc {
            (m, c)
        } else {
            (bm, bc)
        }
    });
    let d_set: Vec<i64> = b
        .elems()
        .iter()
        .copied()
        .filter(|&y| a.contains(m - y))
        .collect();
    let sums: Vec<bool> = fibers.iter().map(|&c| c > 0).collect();
    let containment_ok = d_set.iter().all(|&x| {
        d_set.iter().all(|&y| {
            let s = x - y + m;
            (0..sums.len() as i64).contains(&s) && sums[s as usize]
        })
    });
    let prod = (a.elems().len() * b.elems().len()) as u64;
    Ok(SumsetReduction {
        m,
        size: d_set.len() as u64,
        d_set,
        pigeonhole_bound: prod.div_ceil(2 * n as u64 - 1),
        fiber_total,
        containment_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals() {
        let r = sumset_reduce(&[1, 2, 3], &[1, 2, 3], 3).unwrap();
        assert_eq!(r.m, 4);
        assert_eq!(r.d_set, vec![1, 2, 3]);
        assert_eq!(r.fiber_total, 9);
        assert!(r.size >= r.pigeonhole_bound);
        assert!(r.containment_ok);
    }

    #[test]
    fn empty_input_is_degenerate() {
        assert!(sumset_reduce(&[], &[1], 3).is_err());
    }
}
