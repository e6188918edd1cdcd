//! Major and minor boxes in frequency space, and numerical harnesses for
//! the Weyl-sum estimates: complete sums, oscillatory integrals and the
//! Weyl inequality.

mod complete;
mod major;
mod quadrature;
mod sweeps;
mod weyl_ineq;

pub use complete::{
    complete_sum_split, content_gcd, gauss_report, gauss_sum, hua_table, CompleteSumSplit,
    GaussReport, HuaRow,
};
pub use major::{
    classify_frequency, major_radius, major_witness, q_limit, resolution_advisory, FrequencyClass,
    MajorBoxSpec,
};
pub use quadrature::{
    gauss_legendre, oscillatory_integral, oscillatory_integral_gl, van_der_corput_ratio,
    QuadratureResult,
};
pub use sweeps::{
    fit_minor_exponent, log_log_fit, verify_major_estimate, verify_minor_estimate, ExponentFit,
    MajorReport, MinorReport,
};
pub use weyl_ineq::{
    fixtures_dir, fixtures_from_csv, fixtures_to_csv, weyl_inequality_ratio, weyl_ratio_table,
    FixtureRow, WeylRatio, FIXTURE_HEADER,
};
