//! Computational toolkit for difference sets avoiding polynomial
//! configurations: exact configuration counting, Fourier analysis on
//! anisotropic boxes, Weyl-sum arc estimates, the density-increment
//! dichotomy and the lifting reduction from polynomial families to the
//! monomial curve.

pub mod arcs;
pub mod constants;
pub mod diffset;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod increment;
pub mod io;
pub mod lifting;
pub mod poly;
pub mod rational;

pub use constants::{Calibrated, LabConstants};
pub use error::{Error, Result};
pub use geometry::{
    box_volume, clip_to_box, enumerate_grid, AnisoBox, Block, Geometry, GridSpec, Point, PointSet,
    Sign,
};
pub use poly::PolynomialFamily;
