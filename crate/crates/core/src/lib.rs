//! riemann-lab: a numerical differential-geometry laboratory.
//!
//! Computes curvature of coordinate-chart metrics in dimension up to 4 —
//! Christoffel symbols, the (0,4) Riemann tensor, Ricci, scalar and
//! sectional curvature, the dimension-4 Gauss-Bonnet-Chern integrand — and
//! verifies the identities these quantities satisfy: tensor symmetries,
//! Bianchi identities, frame independence of the Pfaffian, warped-product
//! curvature, first variation of curvature along metric families, and the
//! totally geodesic flat foliation attached to a negative-definite Ricci
//! eigenfield.
//!
//! The sign convention is fixed so that the unit round sphere has sectional
//! curvature +1 and the hyperbolic plane -1.

pub mod error;
pub mod expr;
pub(crate) mod linalg;
pub mod frames;
pub mod foliation;
pub mod gbc;
pub mod metrics;
pub mod tensor;
pub mod variation;

pub use error::{Error, Result};
