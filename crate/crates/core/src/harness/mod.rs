//! Surface generators, the analysis pipeline, and reproducible experiments.

pub mod experiment;
pub mod extrinsic;
pub mod profile;
pub mod suites;

pub use experiment::{
    convergence_study, corollary_check, corollary_suite, ratio_sweep, run_experiment,
    ConvergenceQuantity, ConvergenceRow, CorollaryRow, ExperimentConfig, ExperimentResult, Stage,
    SweepRow, Timing,
};
pub use extrinsic::{extrinsic_geometry, max_deviation, ExtrinsicGeometry};
pub use profile::{generate, profile, HarmonicTerm, SurfaceKind, SurfaceSpec};
pub use suites::{run_suite, CheckRow, Suite};
