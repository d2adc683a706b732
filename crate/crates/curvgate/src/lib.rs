//! Numerical engine for curvature conditions on vector bundles.
//!
//! The crate builds connection metrics and warped connection metrics on the
//! total spaces of vector bundles over a small catalog of base manifolds,
//! computes their curvature two ways (assembled from connection-level
//! primitives, and by finite differences of the metric itself), and checks
//! the sectional-curvature inequalities that govern nonnegative curvature
//! near the zero-section and positive curvature on distance-sphere bundles.
//!
//! Layer map:
//! - [`tensor`]: dense rank-4 curvature tensor algebra, symmetrization,
//!   wedge norms, quadratic-form definiteness.
//! - [`base`]: chart-based Riemannian base manifolds (Christoffel symbols,
//!   curvature, geodesics, parallel transport, directional hessians).
//! - [`bundle`]: Euclidean vector bundles with compatible connections,
//!   curvature forms and their covariant derivatives, Chern numbers.
//! - [`warp`]: warping functions and total-space metric construction,
//!   including the fiber curvature boost and distance-sphere metrics.
//! - [`engine`]: direct numerical geometry of the total space (Riemann
//!   tensor, sectional curvature, O'Neill tensors, the Psi family).
//! - [`verify`]: seeded sampling of inequality margins, definiteness gates,
//!   and the boost-constant search.

pub mod base;
pub mod bundle;
pub mod engine;
pub mod stencil;
pub mod tensor;
pub mod verify;
pub mod warp;

use thiserror::Error;

/// Errors surfaced by geometry construction and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a structural contract (bad dimension, broken symmetry).
    #[error("structural: {0}")]
    Structural(String),
    /// Evaluation left the declared domain (chart exit, radius overflow).
    #[error("domain: {0}")]
    Domain(String),
    /// Numerical failure with a conditioning report.
    #[error("numerical: {msg} (condition estimate {condition:.3e})")]
    Numerical { msg: String, condition: f64 },
    /// Malformed run configuration.
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Step sizes for the finite-difference stencils used across the crate.
///
/// `base_step` feeds first derivatives of metric data, `hessian_step` the
/// 5-point second-derivative stencils along geodesics, and `psi_step` the
/// t-stencils of the Psi family (the noisiest quantity: second derivatives
/// of curvature, itself second derivatives of the metric).
#[derive(Debug, Clone, Copy)]
pub struct StencilConfig {
    pub base_step: f64,
    pub hessian_step: f64,
    pub psi_step: f64,
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig {
            base_step: 1e-3,
            hessian_step: 2e-2,
            psi_step: 5e-3,
        }
    }
}
