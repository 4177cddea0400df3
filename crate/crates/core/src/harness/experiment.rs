//! The analysis pipeline and the experiments built on it.

use super::extrinsic::{extrinsic_geometry, max_deviation, FD_STEP};
use super::profile::{extended_samples, generate, profile, SurfaceKind, SurfaceSpec};
use crate::centering::{solve_center, CenteringResult, MAX_ITERATIONS, PHI_TOLERANCE};
use crate::geometry::{volume_normalize, RadialSurface};
use crate::rigidity::{
    admissibility_with, best_lambda, codazzi_defect_extended, codazzi_residual, default_epsilon,
    gradient_bound_check, hbar_norm, linearized_residual, stability_ratios_with,
    AdmissibilityReport, IndexConvention, RigidityReport, DEFAULT_DELTA,
};
use crate::spectral::extended::ExtendedGrid;
use crate::spectral::norms::{lp_norm, osc};
use crate::spectral::SphereGrid;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Pipeline parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: f64,
    pub delta: f64,
    /// `None` derives `ε = max(‖f‖_∞, (‖∇f‖_∞/2)²)` from the normalized surface.
    pub epsilon: Option<f64>,
    pub phi_tol: f64,
    pub max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: 2.0,
            delta: DEFAULT_DELTA,
            epsilon: None,
            phi_tol: PHI_TOLERANCE,
            max_iter: MAX_ITERATIONS,
        }
    }
}

impl ExperimentConfig {
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }
}

/// Pipeline stage names used in timings and failure records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Normalize,
    Admissibility,
    Centering,
    Stability,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Normalize => "normalize",
            Stage::Admissibility => "admissibility",
            Stage::Centering => "centering",
            Stage::Stability => "stability",
        }
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timing {
    pub normalize: f64,
    pub admissibility: f64,
    pub centering: f64,
    pub stability: f64,
}

/// Everything the pipeline produced for one surface.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub provenance: String,
    pub n: usize,
    pub shape: Vec<usize>,
    pub config: ExperimentConfig,
    /// `ε` actually used.
    pub epsilon: f64,
    pub admissibility: Option<AdmissibilityReport>,
    pub centering: Option<CenteringResult>,
    pub rigidity: Option<RigidityReport>,
    pub failures: Vec<(Stage, String)>,
    pub timing: Timing,
}

/// Normalize, check admissibility, recenter, then measure stability.
pub fn run_experiment(surface: &RadialSurface, config: &ExperimentConfig) -> ExperimentResult {
    let grid = surface.grid();
    let mut result = ExperimentResult {
        provenance: surface.provenance().to_string(),
        n: grid.n(),
        shape: grid.shape().to_vec(),
        config: config.clone(),
        epsilon: config.epsilon.unwrap_or(f64::NAN),
        admissibility: None,
        centering: None,
        rigidity: None,
        failures: Vec::new(),
        timing: Timing::default(),
    };

    let clock = Instant::now();
    let normalized = volume_normalize(surface).and_then(|s| {
        let b = s.geometry()?;
        Ok((s, b))
    });
    result.timing.normalize = clock.elapsed().as_secs_f64();
    let (normalized, bundle) = match normalized {
        Ok(v) => v,
        Err(e) => {
            result.failures.push((Stage::Normalize, e.to_string()));
            return result;
        }
    };
    let epsilon = config
        .epsilon
        .unwrap_or_else(|| default_epsilon(&normalized, &bundle));
    result.epsilon = epsilon;

    let clock = Instant::now();
    match admissibility_with(&normalized, &bundle, config.p, config.delta, epsilon) {
        Ok(r) => result.admissibility = Some(r),
        Err(e) => result.failures.push((Stage::Admissibility, e.to_string())),
    }
    result.timing.admissibility = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let centred = match solve_center(&normalized, config.phi_tol, config.max_iter) {
        Ok(c) => {
            if !c.converged {
                result.failures.push((
                    Stage::Centering,
                    format!(
                        "no convergence: |Φ| = {:e} after {} iterations",
                        c.residual, c.iterations
                    ),
                ));
            }
            let s = c.recentred.clone();
            result.centering = Some(c);
            Some(s)
        }
        Err(e) => {
            result.failures.push((Stage::Centering, e.to_string()));
            None
        }
    };
    result.timing.centering = clock.elapsed().as_secs_f64();

    if let Some(centred) = centred {
        let clock = Instant::now();
        let outcome = centred
            .geometry()
            .and_then(|b| stability_ratios_with(&centred, &b, config.p, epsilon));
        match outcome {
            Ok(r) => result.rigidity = Some(r),
            Err(e) => result.failures.push((Stage::Stability, e.to_string())),
        }
        result.timing.stability = clock.elapsed().as_secs_f64();
    }
    result
}

/// One row of a ratio sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub p: f64,
    pub result: std::result::Result<ExperimentResult, String>,
}

/// Runs the full pipeline for every `(spec, p)` pair, in parallel; rows keep
/// the order of `specs` and then of `ps`.
pub fn ratio_sweep(specs: &[SurfaceSpec], ps: &[f64], config: &ExperimentConfig) -> Vec<SweepRow> {
    let jobs: Vec<(usize, f64)> = (0..specs.len())
        .flat_map(|i| ps.iter().map(move |&p| (i, p)))
        .collect();
    let surfaces: Vec<std::result::Result<RadialSurface, String>> = specs
        .par_iter()
        .map(|s| generate(s).map_err(|e| e.to_string()))
        .collect();
    jobs.par_iter()
        .map(|&(i, p)| {
            let label = specs[i].to_string();
            let result = surfaces[i]
                .clone()
                .map(|s| run_experiment(&s, &config.clone().with_p(p)));
            SweepRow { label, p, result }
        })
        .collect()
}

/// What a convergence study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceQuantity {
    /// `‖∇H − (div Å + nÅ[∇f])/(n−1)‖_{L²_σ}`, from double-double samples of
    /// the profile when it has a polynomial closed form.
    Codazzi,
    /// Largest deviation of `(g, ν, A)` from the finite-difference embedding oracle.
    EmbeddingAgreement,
    /// `‖Δf + nf‖_{L²_σ}`.
    LinearizedKernel,
}

impl ConvergenceQuantity {
    pub fn name(self) -> &'static str {
        match self {
            ConvergenceQuantity::Codazzi => "codazzi",
            ConvergenceQuantity::EmbeddingAgreement => "embedding_agreement",
            ConvergenceQuantity::LinearizedKernel => "linearized_kernel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub shape: Vec<usize>,
    pub residual: f64,
}

/// Evaluates `quantity` for `spec` on each grid of `shapes` (strictly increasing per axis).
pub fn convergence_study(
    spec: &SurfaceSpec,
    shapes: &[Vec<usize>],
    quantity: ConvergenceQuantity,
) -> Result<Vec<ConvergenceRow>> {
    for w in shapes.windows(2) {
        if w[0].len() != w[1].len() || w[0].iter().zip(&w[1]).any(|(a, b)| a >= b) {
            return Err(Error::InvalidSpec(format!(
                "shapes must increase strictly: {:?} then {:?}",
                w[0], w[1]
            )));
        }
    }
    shapes
        .iter()
        .map(|shape| {
            let spec = spec.clone().with_shape(shape.clone());
            let surface = generate(&spec)?;
            let residual = match quantity {
                ConvergenceQuantity::Codazzi => {
                    let ext = ExtendedGrid::new(surface.grid());
                    match extended_samples(&spec, &ext)? {
                        Some(f) => lp_norm(
                            &codazzi_defect_extended(&ext, &f, IndexConvention::GRaised)?,
                            2.0,
                            None,
                        )?,
                        None => codazzi_residual(&surface, 2.0)?,
                    }
                }
                ConvergenceQuantity::EmbeddingAgreement => {
                    let grid = SphereGrid::new(spec.n, shape)?;
                    let oracle = extrinsic_geometry(&profile(&spec)?, &grid, FD_STEP);
                    max_deviation(&surface.geometry()?, &oracle)
                }
                ConvergenceQuantity::LinearizedKernel => linearized_residual(surface.f(), 2.0)?,
            };
            Ok(ConvergenceRow {
                shape: shape.clone(),
                residual,
            })
        })
        .collect()
}

/// The two corollary inequalities on one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryRow {
    pub label: String,
    pub p: f64,
    pub min_norm: f64,
    pub hbar_norm: f64,
    /// `(n+1) · min_norm`.
    pub upper: f64,
    pub sandwich_holds: bool,
    pub osc: f64,
    /// `(‖∇f‖_∞, √(osc/(1−2osc)))` when `osc < 0.4`.
    pub gradient: Option<(f64, f64)>,
    pub gradient_holds: bool,
}

impl CorollaryRow {
    pub fn passed(&self) -> bool {
        self.sandwich_holds && self.gradient_holds
    }
}

/// Oscillation above which the gradient bound is not checked.
pub const GRADIENT_OSC_LIMIT: f64 = 0.4;

/// Checks `min_λ‖A − λg‖ ≤ ‖A − H̄g‖ ≤ (n+1) min_λ‖A − λg‖` and, for
/// `osc f < 0.4`, `‖∇f‖_∞ ≤ √(osc/(1−2osc))`.
pub fn corollary_check(surface: &RadialSurface, p: f64) -> Result<CorollaryRow> {
    let bundle = surface.geometry()?;
    let n = surface.grid().n() as f64;
    let (_, min_norm) = best_lambda(&bundle, p)?;
    let hb = hbar_norm(&bundle, p)?;
    let upper = (n + 1.0) * min_norm;
    let o = osc(surface.f());
    let gradient = if o < GRADIENT_OSC_LIMIT {
        let g = gradient_bound_check(surface, &bundle)?;
        Some((g.lhs, g.rhs))
    } else {
        None
    };
    Ok(CorollaryRow {
        label: surface.provenance().to_string(),
        p,
        min_norm,
        hbar_norm: hb,
        upper,
        sandwich_holds: min_norm <= hb + 1e-12 * (1.0 + hb) && hb <= upper + 1e-9,
        osc: o,
        gradient,
        gradient_holds: gradient.is_none_or(|(l, r)| l <= r + 1e-8),
    })
}

/// Specs of the random convex surfaces used by the corollary checks.
pub fn random_convex_specs(count: usize, seed: u64, n: usize) -> Vec<SurfaceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let kind = SurfaceKind::RandomConvex {
                seed: rng.random(),
                band: 6,
                amplitude: 0.2,
            };
            SurfaceSpec::with_default_shape(kind, n)
        })
        .collect()
}

/// Runs [`corollary_check`] on `count` seeded random convex surfaces.
pub fn corollary_suite(count: usize, seed: u64, p: f64, n: usize) -> Result<Vec<CorollaryRow>> {
    if count == 0 {
        return Err(Error::InvalidSpec("count must be at least 1".into()));
    }
    random_convex_specs(count, seed, n)
        .par_iter()
        .map(|spec| corollary_check(&generate(spec)?, p))
        .collect()
}
