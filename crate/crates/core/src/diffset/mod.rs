//! Configuration counting in difference sets and extremal search.

mod config;
mod count;
mod extremal;

pub use config::{default_d_max, has_polynomial_configuration, ConfigWitness, IntSet};
pub use count::{
    count_monomial_differences, randomness_defect, shift_counts_direct, shift_counts_fft,
    CountBackend, RandomnessDefect,
};
pub use extremal::{
    density_bound_from_log, density_upper_bound, extremal_table, greedy_free_set, ln_big,
    max_free_set_exact, ExactMax, ForbiddenPatterns,
};
