//! The density-increment machinery: the random/structured dichotomy, the
//! spectral mass tables behind it, grid convolutions, rescaling onto a
//! grid, the iteration driver and its bound bookkeeping.

mod bounds;
mod claim;
mod convolution;
mod partition;
mod prefix;
mod rescale;
mod search;
mod spectral;

pub use bounds::{bound_calculator, BoundReport};
pub use claim::{
    claim_c1_check, grid_transform_abs, grid_transform_direct, sigma_at_precondition, ClaimReport,
};
pub use convolution::{grid_convolution_bound, ConvolutionReport};
pub use partition::{integer_root, partition_reduce, PartitionOutcome};
pub use prefix::{run_hits, StridedPrefix};
pub use rescale::{
    at_size_floor, iterate, max_structured_steps, pullback_difference, rescale_to_subproblem,
    IterationTrace, StopReason, TraceStep,
};
pub use search::{
    base_ranges, dichotomy, find_increment_grid, grid_side, interior_count, is_regular,
    DichotomyOutcome, GridHit, UndecidedDiagnostics,
};
pub use spectral::{
    contradiction_report, exact_total_mass, expected_total_mass, l2_mass_on_major_boxes,
    l2_mass_table, ContradictionReport, MassRow, MassTable, DEFAULT_Q_CAP,
};

/// Advances `cur` to the next point of the box `[lo, hi]` in lexicographic
/// order; false once it wraps.
pub(crate) fn advance(cur: &mut [i64], lo: &[i64], hi: &[i64]) -> bool {
    for axis in (0..cur.len()).rev() {
        if cur[axis] < hi[axis] {
            cur[axis] += 1;
            return true;
        }
        cur[axis] = lo[axis];
    }
    false
}
