//! Round-sphere substrate: grids, quadrature, exact `σ` geometry,
//! collocation derivatives, norms and interpolation.

pub mod calculus;
pub mod extended;
pub mod field;
pub mod grid;
pub mod interp;
pub mod norms;
pub mod quadrature;

pub use calculus::{
    ambient_gradient, divergence_mixed, grad, hessian, laplace, partials, trace_sigma,
};
pub use field::{sigma_metric, Christoffel, Metric, ScalarField, TensorField, Valence};
pub use grid::SphereGrid;
pub use interp::{evaluate, Interpolant};
pub use norms::{integrate, lp_norm, osc, sobolev_norm, sup_norm, Magnitude, SobolevVariant};
