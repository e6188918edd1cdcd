use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the laboratory operations.
///
/// Mathematical outcomes (an undecided dichotomy, a failed estimate) are
/// values, never errors. Errors are reserved for violated preconditions and
/// exhausted resources.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension k = {0}: the monomial curve needs k >= 2")]
    InvalidDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point {point:?} lies outside the enclosing {geometry}")]
    PointOutsideGeometry { point: Vec<i64>, geometry: String },

    #[error("density is undefined for an empty set")]
    UndefinedDensity,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support of the lattice function wraps around the embedding group on axis {axis}")]
    Wraparound { axis: usize },

    #[error("the Weyl window floor(eps*M) is empty")]
    EmptyWindow,

    #[error("degenerate resolution: eta^-k = {0} < 1")]
    DegenerateResolution(f64),

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("frequency lattice too coarse on axis {axis}: {points} points across a major box, need at least {needed}")]
    RefinementRequired {
        axis: usize,
        points: u64,
        needed: u64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("rescaling produced an empty subproblem")]
    EmptySubproblem,

    #[error("cannot partition [1,{n}]^{k}: need N >= 2^k")]
    DegeneratePartition { n: u64, k: usize },

    #[error("the polynomial family has rank 0")]
    RankZero,

    #[error("every shift has an empty fiber ({0})")]
    EmptyFiber(String),

    #[error("lifting reduction is degenerate: {0}")]
    ReductionDegenerate(String),

    #[error("quadrature did not converge: estimate {estimate_re}+{estimate_im}i, error bound {error_bound:e}")]
    QuadratureNonConvergence {
        estimate_re: f64,
        estimate_im: f64,
        error_bound: f64,
    },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by an unmet mathematical precondition (as
    /// opposed to malformed input or exhausted resources).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::UndefinedDensity
                | Error::Domain(_)
                | Error::Wraparound { .. }
                | Error::EmptyWindow
                | Error::DegenerateResolution(_)
                | Error::ResolutionTooCoarse(_)
                | Error::RefinementRequired { .. }
                | Error::Precondition(_)
                | Error::Geometry(_)
                | Error::EmptySubproblem
                | Error::DegeneratePartition { .. }
                | Error::RankZero
                | Error::EmptyFiber(_)
                | Error::ReductionDegenerate(_)
                | Error::PointOutsideGeometry { .. }
        )
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::ResourceLimit(_) | Error::QuadratureNonConvergence { .. } | Error::Overflow(_)
        )
    }
}
