use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::search::{dichotomy, DichotomyOutcome};
use crate::constants::LabConstants;
use crate::error::{Error, Result};
use crate::geometry::{AnisoBox, GridSpec, Point, PointSet};
use crate::rational;

/// `B_next = { l in Q_L : m + sign (l_1 q, ..., l_k q^k) in B }`.
pub fn rescale_to_subproblem(b: &PointSet, grid: &GridSpec) -> Result<PointSet> {
    let k = b.k();
    if grid.k() != k {
        return Err(Error::Geometry("grid and set dimensions differ".into()));
    }
    let target = AnisoBox::new(grid.l(), k)?;
    let pulled: Vec<Point> = b
        .points()
        .iter()
        .filter_map(|p| grid.coordinates_of(p))
        .collect();
    if pulled.is_empty() {
        return Err(Error::EmptySubproblem);
    }
    PointSet::in_box(target, pulled)
}

/// The difference in `B - B` that a monomial difference `(d, ..., d^k)` of
/// `B_next` maps to: `((q d), (q d)^2, ..., (q d)^k)` up to the grid sign.
pub fn pullback_difference(grid: &GridSpec, d: i64) -> Result<Point> {
    let qd = (grid.q() as i64)
        .checked_mul(d)
        .ok_or(Error::Overflow("pullback"))?;
    let mut out = Vec::with_capacity(grid.k());
    let mut x = 1i64;
    for _ in 0..grid.k() {
        x = x.checked_mul(qd).ok_or(Error::Overflow("pullback"))?;
        out.push(x);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    WitnessFound,
    SizeFloor,
    StepLimit,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub n: usize,
    #[serde(rename = "M_n")]
    pub m_n: u64,
    #[serde(rename = "delta_n", serialize_with = "rational::serialize")]
    pub delta_n: BigRational,
    pub size: u64,
    pub outcome: DichotomyOutcome,
    /// For a structured step: `M_{n+1} >= c delta_n^(2k+1) M_n`.
    pub size_growth_ok: Option<bool>,
    /// For a structured step: `delta_{n+1} >= delta_n + c delta_n^k`.
    pub density_growth_ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
    pub stop: StopReason,
    /// Wall-clock milliseconds per step; not part of the serialized trace.
    #[serde(skip)]
    pub runtimes_ms: Vec<f64>,
}

impl IterationTrace {
    /// One JSON object per step, with the stop reason on the last line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(
            &serde_json::json!({ "stop": self.stop }),
        )?);
        out.push('\n');
        Ok(out)
    }

    pub fn densities(&self) -> Vec<BigRational> {
        self.steps.iter().map(|s| s.delta_n.clone()).collect()
    }
}

/// Whether `M <= delta^-C`, exactly when `C = p/r` has small terms:
/// `M^r delta^p <= 1`.
pub fn at_size_floor(m: u64, delta: &BigRational, c: &BigRational) -> bool {
    if let (Some(p), Some(r)) = (c.numer().to_usize(), c.denom().to_usize()) {
        if p <= 64 && r <= 64 {
            let lhs = rational::pow(&rational::int(m), r) * rational::pow(delta, p);
            return lhs <= BigRational::one();
        }
    }
    let lhs = (m as f64).ln();
    let rhs = rational::to_f64(c) * -rational::to_f64(delta).ln();
    lhs <= rhs
}

/// Runs the dichotomy, rescaling onto each structured grid, until a branch
/// stops the iteration or `max_steps` dichotomies have run.
pub fn iterate(b: &PointSet, consts: &LabConstants, max_steps: usize) -> Result<IterationTrace> {
    let k = b.k();
    let mut current = b.clone();
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut runtimes = Vec::new();
    let stop = loop {
        if current.is_empty() {
            return Err(Error::UndefinedDensity);
        }
        let qbox = current.aniso_box()?.clone();
        let delta = current.density();
        if at_size_floor(qbox.m(), &delta, &consts.c_upper) {
            break StopReason::SizeFloor;
        }
        if steps.len() >= max_steps {
            break StopReason::StepLimit;
        }
        let start = Instant::now();
        let outcome = dichotomy(&current, consts)?;
        let mut step = TraceStep {
            n: steps.len(),
            m_n: qbox.m(),
            delta_n: delta.clone(),
            size: current.len() as u64,
            outcome,
            size_growth_ok: None,
            density_growth_ok: None,
        };
        let next = match &step.outcome {
            DichotomyOutcome::Random { .. } => None,
            DichotomyOutcome::Undecided { .. } => None,
            DichotomyOutcome::Structured { grid, .. } => {
                let next = rescale_to_subproblem(&current, grid)?;
                let c = &consts.c_lower;
                let m_floor = c * rational::pow(&delta, 2 * k + 1) * rational::int(qbox.m());
                step.size_growth_ok = Some(rational::int(grid.l()) >= m_floor);
                let d_floor = &delta + c * rational::pow(&delta, k);
                step.density_growth_ok = Some(next.density() >= d_floor);
                Some(next)
            }
        };
        runtimes.push(start.elapsed().as_secs_f64() * 1e3);
        let kind = step.outcome.kind();
        steps.push(step);
        match next {
            Some(n) => current = n,
            None if kind == "random" => break StopReason::WitnessFound,
            None => break StopReason::Undecided,
        }
    };
    Ok(IterationTrace {
        steps,
        stop,
        runtimes_ms: runtimes,
    })
}

/// `ceil((1 - delta_0) / (c delta_0^k)) + 1`, the step cap when every step
/// is structured with the promised increment.
pub fn max_structured_steps(delta0: &BigRational, k: usize, c: &BigRational) -> Result<u64> {
    let x = (BigRational::one() - delta0) / (c * rational::pow(delta0, k));
    let v = rational::ceil_i64(&x)?;
    v.to_u64()
        .map(|v| v + 1)
        .ok_or(Error::Overflow("step bound"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Sign;
    use crate::rational::ratio;

    #[test]
    fn identity_grid_restricts_to_a_sub_box() {
        let qbox = AnisoBox::new(4, 2).unwrap();
        let b = PointSet::in_box(qbox, vec![vec![1, 1], vec![2, 3], vec![4, 16]]).unwrap();
        let grid = GridSpec::new(vec![0, 0], 1, 2, Sign::Plus).unwrap();
        let next = rescale_to_subproblem(&b, &grid).unwrap();
        assert_eq!(next.points(), &[vec![1, 1], vec![2, 3]]);
        assert_eq!(next.aniso_box().unwrap().m(), 2);
    }

    #[test]
    fn planted_image_round_trips() {
        let star = vec![vec![1, 2], vec![2, 5], vec![3, 9]];
        let grid = GridSpec::new(vec![5, 7], 2, 3, Sign::Plus).unwrap();
        let qbox = AnisoBox::new(16, 2).unwrap();
        let b = PointSet::in_box(qbox, star.iter().map(|l| grid.point(l)).collect()).unwrap();
        let next = rescale_to_subproblem(&b, &grid).unwrap();
        assert_eq!(next.points(), star.as_slice());
    }

    #[test]
    fn empty_pullback_is_an_error() {
        let b = PointSet::in_box(AnisoBox::new(4, 2).unwrap(), vec![vec![4, 16]]).unwrap();
        let grid = GridSpec::new(vec![0, 0], 1, 2, Sign::Plus).unwrap();
        assert!(matches!(
            rescale_to_subproblem(&b, &grid),
            Err(Error::EmptySubproblem)
        ));
    }

    #[test]
    fn full_box_stops_with_a_witness() {
        let b = PointSet::full_box(AnisoBox::new(8, 2).unwrap()).unwrap();
        let t = iterate(&b, &LabConstants::new(2).unwrap(), 5).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.stop, StopReason::WitnessFound);
        assert!(t.to_jsonl().unwrap().lines().count() == 2);
    }

    #[test]
    fn step_bound() {
        assert_eq!(
            max_structured_steps(&ratio(1, 2), 2, &ratio(1, 1)).unwrap(),
            3
        );
    }
}
