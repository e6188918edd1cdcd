mod common;

use diffsetlab::increment::{base_ranges, grid_side, iterate, DichotomyOutcome, StopReason};
use diffsetlab::rational::ratio;
use diffsetlab::{AnisoBox, GridSpec, LabConstants, Point, PointSet, Sign};

fn planted(q: u64, p: i64) -> PointSet {
    let qbox = AnisoBox::new(64, 2).unwrap();
    let l = grid_side(&ratio(2, 5), &ratio(6, 1), 64, q).unwrap();
    let (lo, _) = base_ranges(&qbox, q, l).unwrap();
    let grid = GridSpec::new(lo, q, l, Sign::Plus).unwrap();
    let l = l as i64;
    let pts: Vec<Point> = (1..=l)
        .flat_map(|c| {
            (1..=l * l)
                .filter(move |y| (y + c * c).rem_euclid(p) == 0)
                .map(move |y| vec![c, y])
        })
        .map(|s| grid.point(&s))
        .collect();
    PointSet::in_box(qbox, pts).unwrap()
}

#[test]
fn iteration_densities_increase_on_structured_steps() {
    let lab = LabConstants::new(2)
        .unwrap()
        .with_eta(ratio(2, 5))
        .unwrap()
        .with_sigma(ratio(6, 1))
        .unwrap()
        .with_c_upper(ratio(1, 4))
        .unwrap();
    for (q, p) in [(2, 37), (3, 29)] {
        let trace = iterate(&planted(q, p), &lab, 6).unwrap();
        assert!(!trace.steps.is_empty());
        let first = &trace.steps[0];
        match &first.outcome {
            DichotomyOutcome::Structured { grid, .. } => assert_eq!(grid.q(), q),
            other => panic!("expected a structured first step, got {}", other.kind()),
        }
        for pair in trace.steps.windows(2) {
            if pair[0].outcome.kind() == "structured" {
                assert!(pair[1].delta_n > pair[0].delta_n);
            }
        }
        let lines = trace.to_jsonl().unwrap();
        assert_eq!(lines.lines().count(), trace.steps.len() + 1);
        assert!(trace.stop != StopReason::StepLimit || trace.steps.len() == 6);
    }
}

#[test]
fn random_sets_stop_with_a_witness() {
    let lab = LabConstants::new(2).unwrap();
    let b = common::random_set(32, 2, 0.3, &mut common::rng(3));
    let trace = iterate(&b, &lab, 4).unwrap();
    assert_eq!(trace.stop, StopReason::WitnessFound);
    assert_eq!(trace.steps.len(), 1);
}
