//! Quantitative umbilicity estimates: best umbilical fit, averaged mean
//! curvature, the Codazzi identity, admissibility, the linearized operator
//! and the first-harmonic (translation) projection.

use crate::geometry::{convexity_check, GeometryBundle, RadialSurface};
use crate::roots::{bisect_increasing, golden_section};
use crate::spectral::calculus::laplace;
use crate::spectral::extended::{div, exp, recip, Dd, ExtendedGrid};
use crate::spectral::norms::{
    check_exponent, integrate, lp_norm, osc, sobolev_norm, sup_norm, SobolevVariant,
};
use crate::spectral::{ScalarField, TensorField, Valence};
use crate::{Error, Result};

/// Tolerance on `|Vol(Σ) − Vol(S^n)|` for the volume condition.
pub const VOLUME_TOLERANCE: f64 = 1e-8;
/// `‖Å‖` at or below which the stability ratio is reported as 0.
pub const DEGENERATE_TRACELESS: f64 = 1e-10;
/// Default admissibility threshold on `‖Å‖_{L^p_g}`.
pub const DEFAULT_DELTA: f64 = 0.5;
/// Default smallness parameter.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// The three admissibility conditions and the `ε`-smallness bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub p: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub is_convex: bool,
    pub min_curvature: f64,
    pub volume_gap: f64,
    pub a_ring_norm: f64,
    pub sup_f: f64,
    pub sup_grad_f: f64,
    pub osc_f: f64,
    /// `‖f‖_∞ ≤ ε` and `‖∇f‖_∞ ≤ 2√ε`.
    pub epsilon_bounds_hold: bool,
    pub is_admissible: bool,
}

/// Stability quantities of one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    pub p: f64,
    pub epsilon: f64,
    pub lambda_star: f64,
    pub min_norm: f64,
    pub h_bar: f64,
    pub hbar_norm: f64,
    pub a_ring_norm: f64,
    pub codazzi_residual: f64,
    pub constant_factor: f64,
    pub linearized_residual: f64,
    pub v_f: Vec<f64>,
    pub w2p_distance: f64,
    /// `√ε ‖f‖_{W^{2,p}_σ}`, the lower-order term accompanying `‖Å‖`.
    pub sqrt_eps_w2p: f64,
    /// `w2p_distance / a_ring_norm`, or 0 when the surface is umbilical to roundoff.
    pub ratio: f64,
    pub degenerate: bool,
    pub admissible: bool,
}

/// Pointwise `|Å|²_g` and `H`, from which `|A − λg|²_g = |Å|²_g + n(H − λ)²`.
fn umbilic_split(bundle: &GeometryBundle) -> (Vec<f64>, Vec<f64>) {
    let n = bundle.grid.n();
    let mut a2 = Vec::with_capacity(bundle.grid.len());
    for node in 0..bundle.grid.len() {
        let gi = bundle.g_inv.at(node);
        let t = bundle.a_traceless.at(node);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        s += gi[i * n + k] * gi[j * n + l] * t[i * n + j] * t[k * n + l];
                    }
                }
            }
        }
        a2.push(s.max(0.0));
    }
    (a2, bundle.h.values().to_vec())
}

struct FitObjective {
    mass: Vec<f64>,
    a2: Vec<f64>,
    h: Vec<f64>,
    n: f64,
    p: f64,
}

impl FitObjective {
    fn new(bundle: &GeometryBundle, p: f64) -> Self {
        let (a2, h) = umbilic_split(bundle);
        let mass = bundle
            .grid
            .weights()
            .iter()
            .zip(bundle.vol_density.values())
            .map(|(w, d)| w * d)
            .collect();
        FitObjective {
            mass,
            a2,
            h,
            n: bundle.grid.n() as f64,
            p,
        }
    }

    /// `‖A − λg‖^p_{L^p_g}`.
    fn value(&self, lambda: f64) -> f64 {
        let half = 0.5 * self.p;
        self.mass
            .iter()
            .zip(&self.a2)
            .zip(&self.h)
            .map(|((m, a2), h)| m * (a2 + self.n * (h - lambda).powi(2)).powf(half))
            .sum()
    }

    /// Derivative of [`Self::value`] in `λ`; nondecreasing because the value is convex.
    fn slope(&self, lambda: f64) -> f64 {
        let half = 0.5 * self.p;
        self.mass
            .iter()
            .zip(&self.a2)
            .zip(&self.h)
            .map(|((m, a2), h)| {
                let dh = h - lambda;
                let q = a2 + self.n * dh * dh;
                if q == 0.0 {
                    0.0
                } else {
                    -m * self.p * self.n * dh * q.powf(half - 1.0)
                }
            })
            .sum()
    }

    fn norm(&self, lambda: f64) -> f64 {
        self.value(lambda).max(0.0).powf(1.0 / self.p)
    }
}

/// Minimizer of `λ ↦ ‖A − λg‖_{L^p_g}` by bracketed search, together with the minimum.
///
/// The bracket is the range of principal curvatures over the nodes.
/// Golden-section search narrows it, then bisection on the sign of the
/// derivative polishes the minimizer.
pub fn best_lambda_search(bundle: &GeometryBundle, p: f64) -> Result<(f64, f64)> {
    check_exponent(p)?;
    let obj = FitObjective::new(bundle, p);
    let curv = bundle.principal_curvatures();
    let lo = curv.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = curv
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Numeric("principal curvatures are not finite".into()));
    }
    if hi - lo <= f64::EPSILON * (1.0 + lo.abs()) {
        let lambda = 0.5 * (lo + hi);
        return Ok((lambda, obj.norm(lambda)));
    }
    let rough = golden_section(|l| obj.value(l), lo, hi, 1e-9);
    let width = 1e-6 * (hi - lo).max(1e-12);
    let (mut a, mut b) = ((rough - width).max(lo), (rough + width).min(hi));
    if obj.slope(a) > 0.0 {
        a = lo;
    }
    if obj.slope(b) < 0.0 {
        b = hi;
    }
    let lambda = bisect_increasing(|l| obj.slope(l), a, b, 1e-15);
    Ok((lambda, obj.norm(lambda)))
}

/// `(λ*, min_λ ‖A − λg‖_{L^p_g})`; for `p = 2` the minimizer is `H̄` in closed form.
pub fn best_lambda(bundle: &GeometryBundle, p: f64) -> Result<(f64, f64)> {
    check_exponent(p)?;
    if p == 2.0 {
        let lambda = h_bar(bundle);
        return Ok((lambda, FitObjective::new(bundle, p).norm(lambda)));
    }
    best_lambda_search(bundle, p)
}

/// `‖A − λg‖_{L^p_g}` at a given `λ`.
pub fn fit_norm(bundle: &GeometryBundle, lambda: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(FitObjective::new(bundle, p).norm(lambda))
}

/// `dV_g`-average of the mean curvature.
pub fn h_bar(bundle: &GeometryBundle) -> f64 {
    let total =
        integrate(&bundle.h, Some(&bundle.vol_density)).expect("bundle fields share a grid");
    total / bundle.volume()
}

/// `‖A − H̄ g‖_{L^p_g}`.
pub fn hbar_norm(bundle: &GeometryBundle, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(FitObjective::new(bundle, p).norm(h_bar(bundle)))
}

/// How the traceless tensor is turned into a `(1,1)` field before taking its divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexConvention {
    /// `Å^i_j = A^i_j − H δ^i_j`, raised with `g`.
    GRaised,
    /// `σ^{ik} Å_{kj}`.
    SigmaRaised,
}

/// `∇H − (div_σ Å + n Å[∇f]) / (n − 1)` as a covector field.
///
/// Evaluated in double-double arithmetic from the samples of `f`, so the
/// result reflects discretization error rather than roundoff amplified by
/// three derivatives.
pub fn codazzi_defect(surface: &RadialSurface, convention: IndexConvention) -> Result<TensorField> {
    let ext = ExtendedGrid::new(surface.grid());
    let f: Vec<Dd> = surface.f().values().iter().map(|&v| Dd::from(v)).collect();
    codazzi_defect_extended(&ext, &f, convention)
}

/// [`codazzi_defect`] from double-double samples of `f`.
pub fn codazzi_defect_extended(
    ext: &ExtendedGrid,
    f: &[Dd],
    convention: IndexConvention,
) -> Result<TensorField> {
    let grid = ext.grid();
    let n = grid.n();
    let len = grid.len();
    if f.len() != len {
        return Err(Error::InvalidSpec(format!(
            "{} samples for a grid of {len} nodes",
            f.len()
        )));
    }
    let (df, d2f) = ext.partials(f);
    let zero = Dd::from(0.0);
    let mut h = vec![zero; len];
    let mut mixed = vec![zero; len * n * n];
    for node in 0..len {
        let sig = ext.sigma_diag(node);
        let gamma = ext.christoffel(node);
        let fi: Vec<Dd> = (0..n).map(|a| df[a][node]).collect();
        let up: Vec<Dd> = (0..n).map(|a| div(fi[a], sig[a])).collect();
        let w2 = (0..n).fold(Dd::from(1.0), |acc, a| acc + fi[a] * up[a]);
        let ef = exp(f[node]);
        let scale = div(ef, w2.sqrt());
        let delta = |i: usize, j: usize| if i == j { sig[i] } else { zero };
        let mut a = vec![zero; n * n];
        let mut g = vec![zero; n * n];
        let mut g_inv = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                let hess = (0..n).fold(d2f[i][j][node], |acc, k| {
                    acc - gamma[(k * n + i) * n + j] * fi[k]
                });
                a[i * n + j] = scale * (delta(i, j) + fi[i] * fi[j] - hess);
                g[i * n + j] = ef * ef * (delta(i, j) + fi[i] * fi[j]);
                let inv = if i == j { recip(sig[i]) } else { zero };
                g_inv[i * n + j] = div(inv - div(up[i] * up[j], w2), ef * ef);
            }
        }
        let mut shape = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                shape[i * n + j] =
                    (0..n).fold(zero, |acc, k| acc + g_inv[i * n + k] * a[k * n + j]);
            }
        }
        let hv = (0..n).fold(zero, |acc, i| acc + shape[i * n + i]) / n as f64;
        h[node] = hv;
        let t = &mut mixed[node * n * n..(node + 1) * n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = match convention {
                    IndexConvention::GRaised => shape[i * n + j] - if i == j { hv } else { zero },
                    IndexConvention::SigmaRaised => div(a[i * n + j] - hv * g[i * n + j], sig[i]),
                };
            }
        }
    }
    let div = ext.divergence_mixed(&mixed);
    let dh = ext.grad(&h);
    let mut out = TensorField::zeros(grid.clone(), Valence::Covector, false);
    let scale = 1.0 / (n as f64 - 1.0);
    for node in 0..len {
        let t = &mixed[node * n * n..(node + 1) * n * n];
        let o = out.at_mut(node);
        for k in 0..n {
            let contraction = (0..n).fold(zero, |acc, i| acc + t[i * n + k] * df[i][node]);
            o[k] = (dh[k][node] - (div[node * n + k] + contraction * n as f64) * scale).hi();
        }
    }
    Ok(out)
}

/// `L^p_σ` norm of the Codazzi defect with the `g`-raised convention.
pub fn codazzi_residual(surface: &RadialSurface, p: f64) -> Result<f64> {
    codazzi_residual_with(surface, p, IndexConvention::GRaised)
}

pub fn codazzi_residual_with(
    surface: &RadialSurface,
    p: f64,
    convention: IndexConvention,
) -> Result<f64> {
    check_exponent(p)?;
    lp_norm(&codazzi_defect(surface, convention)?, p, None)
}

/// `(1 + ‖∇f‖_∞)^{(p+1)/p} exp((n/p) osc f)`, the structural factor of the
/// first-order estimate with its dimensional constant set to 1.
pub fn constant_factor(n: usize, p: f64, osc_f: f64, sup_grad_f: f64) -> f64 {
    (1.0 + sup_grad_f).powf((p + 1.0) / p) * (n as f64 / p * osc_f).exp()
}

/// `max_nodes |∇f|_σ`.
pub fn sup_gradient(bundle: &GeometryBundle) -> f64 {
    bundle
        .w
        .values()
        .iter()
        .fold(0.0f64, |m, w| m.max((w * w - 1.0).max(0.0).sqrt()))
}

/// Result of the oscillation bound on the gradient of a convex profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBound {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks `‖∇f‖_∞ ≤ √(osc f / (1 − 2 osc f))`, meaningful for convex surfaces.
pub fn gradient_bound_check(
    surface: &RadialSurface,
    bundle: &GeometryBundle,
) -> Result<GradientBound> {
    let o = osc(surface.f());
    if o >= 0.5 {
        return Err(Error::OscillationTooLarge(o));
    }
    let lhs = sup_gradient(bundle);
    let rhs = (o / (1.0 - 2.0 * o)).sqrt();
    Ok(GradientBound {
        holds: lhs <= rhs + 1e-8,
        lhs,
        rhs,
    })
}

/// `max(‖f‖_∞, (‖∇f‖_∞ / 2)²)`, kept inside `(0, ¼)`.
pub fn default_epsilon(surface: &RadialSurface, bundle: &GeometryBundle) -> f64 {
    let g = sup_gradient(bundle);
    let raw = sup_norm(surface.f()).max(0.25 * g * g);
    raw.clamp(1e-16, 0.25 * (1.0 - 1e-9))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.25 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

/// Evaluates the admissibility conditions: convex, volume of the unit
/// sphere, and `‖Å‖_{L^p_g} ≤ δ`.
pub fn admissibility(
    surface: &RadialSurface,
    p: f64,
    delta: f64,
    epsilon: f64,
) -> Result<AdmissibilityReport> {
    let bundle = surface.geometry()?;
    admissibility_with(surface, &bundle, p, delta, epsilon)
}

pub fn admissibility_with(
    surface: &RadialSurface,
    bundle: &GeometryBundle,
    p: f64,
    delta: f64,
    epsilon: f64,
) -> Result<AdmissibilityReport> {
    check_exponent(p)?;
    check_epsilon(epsilon)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let convexity = convexity_check(bundle);
    let volume_gap = (bundle.volume() - bundle.grid.sphere_volume()).abs();
    let a_ring_norm = lp_norm(&bundle.a_traceless, p, Some(&bundle.metric()))?;
    let sup_f = sup_norm(surface.f());
    let sup_grad_f = sup_gradient(bundle);
    let is_admissible =
        convexity.is_convex && volume_gap < VOLUME_TOLERANCE && a_ring_norm <= delta;
    Ok(AdmissibilityReport {
        p,
        delta,
        epsilon,
        is_convex: convexity.is_convex,
        min_curvature: convexity.min_eigenvalue,
        volume_gap,
        a_ring_norm,
        sup_f,
        sup_grad_f,
        osc_f: osc(surface.f()),
        epsilon_bounds_hold: sup_f <= epsilon && sup_grad_f <= 2.0 * epsilon.sqrt(),
        is_admissible,
    })
}

/// `‖Δf + n f‖_{L^p_σ}`; vanishes exactly on restrictions of linear functions.
pub fn linearized_residual(f: &ScalarField, p: f64) -> Result<f64> {
    let n = f.grid().n() as f64;
    let lf = laplace(f);
    let r = lf.zip_with(f, |a, b| a + n * b)?;
    lp_norm(&r, p, None)
}

/// `v_f = (n+1)/Vol(S^n) ∮ x f dV_σ` and the remainder `f − (v_f, ·)`.
pub fn obata_projection(f: &ScalarField) -> (Vec<f64>, ScalarField) {
    let grid = f.grid();
    let d = grid.ambient_dim();
    let scale = d as f64 / grid.sphere_volume();
    let mut v = vec![0.0; d];
    for (node, (&w, &fv)) in grid.weights().iter().zip(f.values()).enumerate() {
        let x = grid.point(node);
        for m in 0..d {
            v[m] += w * fv * x[m];
        }
    }
    v.iter_mut().for_each(|c| *c *= scale);
    let linear = ScalarField::linear(grid.clone(), &v);
    let remainder = f - &linear;
    (v, remainder)
}

/// All stability quantities of a surface, normally an admissible, centered one.
pub fn stability_ratios(surface: &RadialSurface, p: f64, epsilon: f64) -> Result<RigidityReport> {
    let bundle = surface.geometry()?;
    stability_ratios_with(surface, &bundle, p, epsilon)
}

pub fn stability_ratios_with(
    surface: &RadialSurface,
    bundle: &GeometryBundle,
    p: f64,
    epsilon: f64,
) -> Result<RigidityReport> {
    check_exponent(p)?;
    check_epsilon(epsilon)?;
    let n = bundle.grid.n();
    let (lambda_star, min_norm) = best_lambda(bundle, p)?;
    let hb = h_bar(bundle);
    let hbar_n = hbar_norm(bundle, p)?;
    let metric = bundle.metric();
    let a_ring_norm = lp_norm(&bundle.a_traceless, p, Some(&metric))?;
    let codazzi = codazzi_residual(surface, p)?;
    let factor = constant_factor(n, p, osc(surface.f()), sup_gradient(bundle));
    let lin = linearized_residual(surface.f(), p)?;
    let (v_f, remainder) = obata_projection(surface.f());
    let w2p_distance = sobolev_norm(&remainder, p, 2, SobolevVariant::Full)?;
    let sqrt_eps_w2p = epsilon.sqrt() * sobolev_norm(surface.f(), p, 2, SobolevVariant::Full)?;
    let degenerate = a_ring_norm <= DEGENERATE_TRACELESS;
    let ratio = if degenerate {
        0.0
    } else {
        w2p_distance / a_ring_norm
    };
    let convex = convexity_check(bundle).is_convex;
    let volume_gap = (bundle.volume() - bundle.grid.sphere_volume()).abs();
    Ok(RigidityReport {
        p,
        epsilon,
        lambda_star,
        min_norm,
        h_bar: hb,
        hbar_norm: hbar_n,
        a_ring_norm,
        codazzi_residual: codazzi,
        constant_factor: factor,
        linearized_residual: lin,
        v_f,
        w2p_distance,
        sqrt_eps_w2p,
        ratio,
        degenerate,
        admissible: convex && volume_gap < VOLUME_TOLERANCE && a_ring_norm <= DEFAULT_DELTA,
    })
}
