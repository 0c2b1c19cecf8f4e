//! Crate-wide error type.

use thiserror::Error;

/// Result alias used across the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: found {found}, expected {}", expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("domain error: {what} in `{subexpr}`")]
    Domain { what: String, subexpr: String },

    #[error("expression references x{coord} but the chart dimension is {dim}")]
    CoordOutOfRange { coord: usize, dim: usize },

    #[error("unknown builtin metric `{0}`")]
    UnknownBuiltin(String),

    #[error("bad parameter `{name}`: {reason}")]
    BadParameter { name: String, reason: String },

    #[error("malformed metric spec: {0}; grammar is `builtin:<name>[,<k>=<v>...]` | `warp:base=<spec>;fiber=<spec>;f=<expr>` | `explicit:g11=<expr>,...;box=a1,b1,...[;periodic=0101]`")]
    MetricSpec(String),

    #[error("invalid chart: {0}")]
    Chart(String),

    #[error("{op} requires dimension {expected}, metric has dimension {found}")]
    Dimension {
        op: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("metric is not positive definite at {point:?}; eigenvalues {eigenvalues:?}")]
    NotPositiveDefinite {
        point: Vec<f64>,
        eigenvalues: Vec<f64>,
    },

    #[error("warping function is not strictly positive on the chart (f({point:?}) = {value})")]
    NonPositiveWarp { point: Vec<f64>, value: f64 },

    #[error("point {point:?} lies outside the chart interior")]
    OutsideChart { point: Vec<f64> },

    #[error("seed vectors are rank deficient (pivot {pivot:.3e})")]
    RankDeficient { pivot: f64 },

    #[error("frame is not orthonormal with respect to g (residual {residual:.3e})")]
    NonOrthonormalFrame { residual: f64 },

    #[error("degenerate plane: Gram determinant {det:.3e} below threshold")]
    DegeneratePlane { det: f64 },

    #[error("frame search did not converge after {restarts} restarts (best residual {residual:.3e})")]
    FrameNonConvergence {
        restarts: usize,
        residual: f64,
        best: Box<crate::frames::Frame>,
    },

    #[error("eigenfield failure at {point:?}: {reason}")]
    EigenfieldPoint { point: Vec<f64>, reason: String },

    #[error("finite-difference stencil leaves the chart near {point:?}")]
    StencilOutsideChart { point: Vec<f64> },

    #[error("eigenvector sign flip detected on stencil near {point:?}")]
    SignFlip { point: Vec<f64> },

    #[error("vector is not perpendicular to V (inner product {dot:.3e})")]
    PerpendicularityViolation { dot: f64 },

    #[error("matrix is not skew-symmetric (residual {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("matrix is not negative definite; eigenvalues {eigenvalues:?}")]
    NotNegativeDefinite { eigenvalues: Vec<f64> },

    #[error("{what}: routes disagree ({lhs:.17e} vs {rhs:.17e})")]
    RouteMismatch { what: String, lhs: f64, rhs: f64 },

    #[error("non-finite integrand at {point:?}")]
    NonFiniteIntegrand { point: Vec<f64> },

    #[error("quadrature spec: {0}")]
    Quadrature(String),

    #[error("internal error: {0}")]
    Internal(String),
}
