#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use diffsetlab::{AnisoBox, Point, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every point of `Q_M` kept independently with probability `p`.
pub fn random_set(m: u64, k: usize, p: f64, rng: &mut ChaCha8Rng) -> PointSet {
    let qbox = AnisoBox::new(m, k).unwrap();
    let block = qbox.block();
    let pts: Vec<Point> = (0..block.cells().unwrap())
        .filter(|_| rng.gen_bool(p))
        .map(|i| block.point_at(i))
        .collect();
    PointSet::in_box(qbox, pts).unwrap()
}

/// Ordered pairs `(x, y)` of `B` with `x - y = (d, ..., d^k)` and
/// `1 <= d <= d_max`, by a double loop over the points.
pub fn pair_count_oracle(points: &[Point], d_max: i64) -> u64 {
    let mut n = 0;
    for x in points {
        for y in points {
            let d = x[0] - y[0];
            if d < 1 || d > d_max {
                continue;
            }
            let mut pw = d;
            let mut ok = true;
            for j in 1..x.len() {
                pw *= d;
                if x[j] - y[j] != pw {
                    ok = false;
                    break;
                }
            }
            if ok {
                n += 1;
            }
        }
    }
    n
}

/// Maximum independent set of the graph on `[1, n]` joining `i, j` when
/// `|i - j|` is a nonzero square, by memoized bitmask recursion.
pub fn square_free_mis(n: usize) -> usize {
    assert!(n <= 64);
    let mut adj = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            let d = i.abs_diff(j);
            let r = (d as f64).sqrt() as usize;
            if d > 0 && r * r == d {
                adj[i] |= 1 << j;
            }
        }
    }
    fn go(mask: u64, adj: &[u64], memo: &mut HashMap<u64, usize>) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let take = 1 + go(rest & !adj[v], adj, memo);
        let best = if adj[v] & rest == 0 {
            take
        } else {
            take.max(go(rest, adj, memo))
        };
        memo.insert(mask, best);
        best
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(full, &adj, &mut HashMap::new())
}

pub fn as_set(points: &[Point]) -> HashSet<Point> {
    points.iter().cloned().collect()
}
