//! Discrete Fourier analysis of lattice functions supported in boxes.
//!
//! Transforms are computed exactly on a finite embedding group large enough
//! that no wraparound occurs, so the torus integrals become normalized
//! lattice sums.

mod balance;
mod group;
mod transform;
mod weyl;

pub use balance::{
    balance_function, curve_transform, spectral_count, weighted_count_identity, BalanceFunction,
    SpectralCount, WeightedCountIdentity,
};
pub use group::EmbeddingGroup;
pub use transform::{
    autocorrelation_at, check_no_wraparound, dft, dft_direct, embed, pairwise_sum, HistogramBin,
    LatticeFunction, NdFft, NeumaierSum, Spectrum,
};
pub use weyl::{
    curve_window, exp_sum, exp_sum_by_phase, exp_sum_rational, weyl_sum, weyl_sum_rational,
    window_length, PolyPhase,
};
