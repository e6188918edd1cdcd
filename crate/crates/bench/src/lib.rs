//! Seeded inputs shared by the benchmarks.

use diffsetlab::{AnisoBox, Point, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Each point of `Q_M` (dimension `k`) kept independently with probability `p`.
pub fn random_set(m: u64, k: usize, p: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qbox = AnisoBox::new(m, k).expect("valid box");
    let block = qbox.block();
    let cells = block.cells().expect("box fits in memory");
    let pts: Vec<Point> = (0..cells)
        .filter(|_| rng.gen_bool(p))
        .map(|i| block.point_at(i))
        .collect();
    PointSet::in_box(qbox, pts).expect("points lie in the box")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_sets_repeat() {
        let a = random_set(16, 2, 0.2, 9);
        assert_eq!(a, random_set(16, 2, 0.2, 9));
        assert!(!a.is_empty());
    }
}
