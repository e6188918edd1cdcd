//! Reduction from a general polynomial family to the monomial curve, and
//! the sumset-to-difference-set reduction.

mod decompose;
mod lift;
mod sumset;

pub use decompose::{decompose, LiftDecomposition};
pub use lift::{
    build_lifted_set, lift_gamma, monomial_difference, shift_search, LiftedSet, ShiftSearch,
};
pub use sumset::{sumset_reduce, SumsetReduction};
