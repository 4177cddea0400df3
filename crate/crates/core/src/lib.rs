//! Radial-graph differential geometry for closed hypersurfaces near the round
//! sphere `S^n ⊂ R^{n+1}`, and the numerical pipeline that measures how far a
//! convex, nearly umbilical hypersurface is from a sphere.
//!
//! A star-shaped hypersurface is represented by its log-radial profile `f`
//! on a spectral grid over `S^n`, through `ψ(x) = e^{f(x)} x`. From `f` the
//! crate computes the induced metric, normal, second fundamental form, mean
//! curvature and traceless part; then the best umbilical fit, admissibility
//! flags, recentering and the `W^{2,p}` distance to the sphere.
//!
//! Module map:
//! - [`spectral`]: grids, quadrature, collocation derivatives, norms and interpolation.
//! - [`geometry`]: the radial surface and its geometry bundle.
//! - [`rigidity`]: best umbilical fit, admissibility, linearized residuals and reports.
//! - [`centering`]: reradialization about a shifted center and the center solver.
//! - [`harness`]: surface generators, experiments and verification suites.
//! - [`io`]: surface and report file formats.

pub mod centering;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod rigidity;
pub mod roots;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{GeometryBundle, RadialSurface};
pub use spectral::{Metric, ScalarField, SphereGrid, TensorField, Valence};
