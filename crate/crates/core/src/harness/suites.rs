//! Verification suites: named checks with a value, a threshold and a verdict.

use super::experiment::{
    convergence_study, corollary_check, random_convex_specs, ratio_sweep, ConvergenceQuantity,
    ExperimentConfig,
};
use super::profile::{generate, HarmonicTerm, SurfaceKind, SurfaceSpec};
use crate::geometry::RadialSurface;
use crate::rigidity::{
    best_lambda, best_lambda_search, fit_norm, h_bar, linearized_residual, obata_projection,
    stability_ratios,
};
use crate::spectral::{lp_norm, ScalarField, SphereGrid};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Shapes of the Codazzi self-convergence check.
pub const CODAZZI_SHAPES: [[usize; 2]; 3] = [[16, 32], [32, 64], [48, 96]];

/// Ellipsoid eccentricities and exponents of the ratio sweep.
pub const SWEEP_EPSILONS: [f64; 3] = [0.01, 0.02, 0.05];
pub const SWEEP_EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

/// Number of random convex surfaces in the corollary suite.
pub const COROLLARY_COUNT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Passes when `value ≤ threshold`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckRow {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value` is finite; the threshold column reads `inf`.
    pub fn finite(name: impl Into<String>, value: f64) -> Self {
        CheckRow {
            name: name.into(),
            value,
            threshold: f64::INFINITY,
            pass: value.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Codazzi,
    Corollary,
    Convergence,
    Ratios,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Identities,
        Suite::Codazzi,
        Suite::Corollary,
        Suite::Convergence,
        Suite::Ratios,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Codazzi => "codazzi",
            Suite::Corollary => "corollary",
            Suite::Convergence => "convergence",
            Suite::Ratios => "ratios",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown suite `{s}`")))
    }
}

/// Runs one suite. Every suite is a pure function of `seed`.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Identities => identities(seed),
        Suite::Codazzi => codazzi(),
        Suite::Corollary => corollary(seed),
        Suite::Convergence => convergence(seed),
        Suite::Ratios => ratios(seed),
    }
}

fn shape_tag(shape: &[usize]) -> String {
    shape
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A seeded vector with `|v| ≤ radius`.
pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let r = norm(&dir);
    let len = radius * rng.random::<f64>();
    dir.iter().map(|v| v * len / r).collect()
}

/// Seeded harmonic perturbation on `S²` with degrees `1..=band`, all orders,
/// and coefficients `N(0,1) · amplitude / ℓ²`.
pub fn random_band_limited(
    seed: u64,
    band: usize,
    amplitude: f64,
    shape: Vec<usize>,
) -> SurfaceSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for l in 1..=band {
        for m in -(l as i64)..=(l as i64) {
            let c: f64 = rng.sample(StandardNormal);
            terms.push(HarmonicTerm {
                l,
                m,
                amplitude: c * amplitude / (l * l) as f64,
            });
        }
    }
    SurfaceSpec::new(SurfaceKind::HarmonicPerturbation { terms }, 2, shape)
}

/// `0.05 · Y₂` about the last axis on `S²`.
pub fn quadrupole(shape: Vec<usize>) -> SurfaceSpec {
    let terms = vec![HarmonicTerm {
        l: 2,
        m: 0,
        amplitude: 0.1,
    }];
    SurfaceSpec::new(SurfaceKind::HarmonicPerturbation { terms }, 2, shape)
}

fn sphere_rows(n: usize, shape: &[usize]) -> Result<Vec<CheckRow>> {
    let grid = SphereGrid::new(n, shape)?;
    let s = RadialSurface::round(grid);
    let b = s.geometry()?;
    let tag = format!("sphere_n{n}_{}", shape_tag(shape));
    let metric = b.metric();
    let (v, _) = obata_projection(s.f());
    Ok(vec![
        CheckRow::at_most(
            format!("{tag}_traceless_l2"),
            lp_norm(&b.a_traceless, 2.0, Some(&metric))?,
            1e-10,
        ),
        CheckRow::at_most(
            format!("{tag}_a_minus_g_l2"),
            fit_norm(&b, 1.0, 2.0)?,
            1e-10,
        ),
        CheckRow::at_most(
            format!("{tag}_hbar_minus_one"),
            (h_bar(&b) - 1.0).abs(),
            1e-10,
        ),
        CheckRow::at_most(format!("{tag}_v_f"), norm(&v), 1e-10),
        CheckRow::at_most(
            format!("{tag}_linearized"),
            linearized_residual(s.f(), 2.0)?,
            1e-10,
        ),
    ])
}

fn identities(seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = sphere_rows(2, &[32, 64])?;
    rows.extend(sphere_rows(3, &[12, 12, 24])?);

    let grid = SphereGrid::new(2, &[32, 64])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut kernel, mut recovery) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let v = random_vector(&mut rng, 3, 0.2);
        let f = ScalarField::linear(grid.clone(), &v);
        kernel = kernel.max(linearized_residual(&f, 2.0)?);
        let (w, _) = obata_projection(&f);
        let err: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a - b).collect();
        recovery = recovery.max(norm(&err));
    }
    rows.push(CheckRow::at_most("obata_kernel_residual", kernel, 1e-9));
    rows.push(CheckRow::at_most(
        "obata_projection_recovery",
        recovery,
        1e-9,
    ));

    let q = generate(&quadrupole(vec![32, 64]))?;
    let b = q.geometry()?;
    rows.push(CheckRow::at_most(
        "quadrupole_traceless_trace",
        b.traceless_trace()
            .max()
            .abs()
            .max(b.traceless_trace().min().abs()),
        1e-12,
    ));
    rows.push(CheckRow::at_most(
        "quadrupole_inverse_metric",
        b.inverse_residual(),
        1e-12,
    ));
    rows.push(CheckRow::at_most(
        "quadrupole_metric_compatibility",
        b.metric_compatibility_residual(&q),
        1e-7,
    ));
    rows.push(CheckRow::at_most(
        "quadrupole_shape_operator_forms",
        b.shape_op_mismatch,
        1e-12,
    ));
    let (closed, _) = best_lambda(&b, 2.0)?;
    let (searched, _) = best_lambda_search(&b, 2.0)?;
    rows.push(CheckRow::at_most(
        "best_lambda_p2_equals_hbar",
        (closed - searched).abs(),
        1e-8,
    ));

    let a = random_vector(&mut rng, 3, 0.2);
    let t = generate(&SurfaceSpec::new(
        SurfaceKind::TranslatedSphere { a },
        2,
        vec![32, 64],
    ))?;
    let bt = t.geometry()?;
    rows.push(CheckRow::at_most(
        "translated_sphere_traceless_l2",
        lp_norm(&bt.a_traceless, 2.0, Some(&bt.metric()))?,
        1e-9,
    ));
    Ok(rows)
}

/// Rows for a residual sequence: one per shape, the last against `finest`,
/// plus one decrease row per consecutive pair.
fn decrease_rows(
    prefix: &str,
    rows: &[super::experiment::ConvergenceRow],
    finest: f64,
) -> Vec<CheckRow> {
    let mut out: Vec<CheckRow> = rows
        .iter()
        .map(|r| CheckRow::finite(format!("{prefix}_{}", shape_tag(&r.shape)), r.residual))
        .collect();
    if let (Some(last), Some(row)) = (rows.last(), out.last_mut()) {
        *row = CheckRow::at_most(
            format!("{prefix}_{}", shape_tag(&last.shape)),
            last.residual,
            finest,
        );
    }
    for w in rows.windows(2) {
        let ratio = w[1].residual / w[0].residual;
        out.push(CheckRow {
            name: format!(
                "{prefix}_decrease_{}_{}",
                shape_tag(&w[0].shape),
                shape_tag(&w[1].shape)
            ),
            value: ratio,
            threshold: 1.0,
            pass: ratio < 1.0,
        });
    }
    out
}

fn codazzi() -> Result<Vec<CheckRow>> {
    let shapes: Vec<Vec<usize>> = CODAZZI_SHAPES.iter().map(|s| s.to_vec()).collect();
    let rows = convergence_study(
        &quadrupole(shapes[0].clone()),
        &shapes,
        ConvergenceQuantity::Codazzi,
    )?;
    Ok(decrease_rows("codazzi", &rows, 1e-6))
}

fn corollary(seed: u64) -> Result<Vec<CheckRow>> {
    let specs = random_convex_specs(COROLLARY_COUNT, seed, 2);
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let s = generate(spec)?;
            let mut worst = 0.0f64;
            let mut pass = true;
            for p in [1.5, 2.0, 3.0] {
                let row = corollary_check(&s, p)?;
                pass &= row.passed();
                let lower = row.min_norm / (row.hbar_norm + 1e-12 * (1.0 + row.hbar_norm));
                let upper = row.hbar_norm / (row.upper + 1e-9);
                worst = worst.max(lower).max(upper);
                if let Some((lhs, rhs)) = row.gradient {
                    worst = worst.max(lhs / (rhs + 1e-8));
                }
            }
            Ok(CheckRow {
                name: format!("corollary_surface_{i:03}"),
                value: worst,
                threshold: 1.0,
                pass,
            })
        })
        .collect()
}

fn convergence(seed: u64) -> Result<Vec<CheckRow>> {
    let shapes = vec![vec![16, 32], vec![24, 48], vec![32, 64]];
    let spec = random_band_limited(seed, 6, 0.05, shapes[0].clone());
    let mut out = Vec::new();
    for r in convergence_study(&spec, &shapes, ConvergenceQuantity::EmbeddingAgreement)? {
        out.push(CheckRow::at_most(
            format!("embedding_{}", shape_tag(&r.shape)),
            r.residual,
            1e-6,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_vector(&mut rng, 3, 0.2);
    let terms = vec![
        HarmonicTerm {
            l: 1,
            m: 1,
            amplitude: v[0],
        },
        HarmonicTerm {
            l: 1,
            m: -1,
            amplitude: v[1],
        },
        HarmonicTerm {
            l: 1,
            m: 0,
            amplitude: v[2],
        },
    ];
    let linear = SurfaceSpec::new(
        SurfaceKind::HarmonicPerturbation { terms },
        2,
        shapes[0].clone(),
    );
    for r in convergence_study(&linear, &shapes, ConvergenceQuantity::LinearizedKernel)? {
        out.push(CheckRow::at_most(
            format!("linearized_kernel_{}", shape_tag(&r.shape)),
            r.residual,
            1e-10,
        ));
    }
    out.extend(codazzi()?);
    Ok(out)
}

fn ratios(seed: u64) -> Result<Vec<CheckRow>> {
    let mut specs: Vec<SurfaceSpec> = SWEEP_EPSILONS
        .iter()
        .map(|&e| SurfaceSpec::ellipsoid_family(2, e))
        .collect();
    specs.extend(random_convex_specs(2, seed, 2));
    let config = ExperimentConfig::default();
    let sweep = ratio_sweep(&specs, &SWEEP_EXPONENTS, &config);
    let mut out = Vec::new();
    let mut by_p: Vec<Vec<f64>> = vec![Vec::new(); SWEEP_EXPONENTS.len()];
    for (k, row) in sweep.iter().enumerate() {
        let (i, j) = (k / SWEEP_EXPONENTS.len(), k % SWEEP_EXPONENTS.len());
        let ratio = match &row.result {
            Ok(r) if r.failures.is_empty() => r
                .rigidity
                .as_ref()
                .filter(|g| !g.degenerate)
                .map_or(f64::NAN, |g| g.ratio),
            _ => f64::NAN,
        };
        let label = if i < SWEEP_EPSILONS.len() {
            by_p[j].push(ratio);
            format!("ellipsoid_eps{}", SWEEP_EPSILONS[i])
        } else {
            format!("random_convex_{}", i - SWEEP_EPSILONS.len())
        };
        out.push(CheckRow::finite(format!("ratio_{label}_p{}", row.p), ratio));
    }
    for (j, values) in by_p.iter().enumerate() {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(CheckRow::at_most(
            format!("ratio_spread_p{}", SWEEP_EXPONENTS[j]),
            max / min,
            2.0,
        ));
    }
    let sphere = RadialSurface::round(SphereGrid::new(2, &[32, 64])?);
    let mut worst = 0.0f64;
    for p in SWEEP_EXPONENTS {
        let r = stability_ratios(&sphere, p, 0.1)?;
        for v in [
            r.min_norm,
            r.hbar_norm,
            r.a_ring_norm,
            r.codazzi_residual,
            r.linearized_residual,
            r.w2p_distance,
            r.ratio,
            norm(&r.v_f),
        ] {
            worst = worst.max(v.abs());
        }
    }
    out.push(CheckRow::at_most("sphere_row_zero", worst, 1e-10));
    Ok(out)
}
