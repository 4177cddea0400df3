//! Recentering: the radial profile of the same hypersurface seen from a
//! shifted center, the first-harmonic map `Φ(c)`, and a solver for `Φ(c₀) = 0`.

use crate::geometry::RadialSurface;
use crate::rigidity::obata_projection;
use crate::roots::newton_bracketed;
use crate::spectral::calculus::ambient_gradient;
use crate::spectral::{Interpolant, ScalarField};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Default tolerance on `|Φ(c₀)|`.
pub const PHI_TOLERANCE: f64 = 1e-10;
/// Default iteration cap of the center solver.
pub const MAX_ITERATIONS: usize = 50;
const MAX_HALVINGS: usize = 6;
const RAY_TOLERANCE: f64 = 1e-15;

/// Outcome of [`solve_center`].
#[derive(Debug, Clone)]
pub struct CenteringResult {
    pub c0: Vec<f64>,
    /// Number of `Φ` evaluations at accepted iterates, the starting point included.
    pub iterations: usize,
    pub residual: f64,
    pub recentred: RadialSurface,
    pub converged: bool,
    /// How many times the secant Jacobian was replaced by finite differences.
    pub jacobian_refreshes: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Profile `f_c` of the same hypersurface about the center `c`:
/// `e^{f_c(z)} z + c` lies on `Σ` for every node `z`.
///
/// Each ray `t ↦ c + t z` is intersected with `Σ` by safeguarded Newton on
/// `F(t) = |c + tz| − ρ((c + tz)/|c + tz|)`, with `ρ` and its gradient
/// interpolated spectrally.
pub fn reradialize(surface: &RadialSurface, c: &[f64]) -> Result<RadialSurface> {
    let grid = surface.grid().clone();
    let d = grid.ambient_dim();
    if c.len() != d {
        return Err(Error::DirectionLength {
            expected: d,
            got: c.len(),
        });
    }
    let provenance = surface.provenance().to_string();
    let cn = norm(c);
    if cn == 0.0 {
        return Ok(surface.clone());
    }
    let unsafe_center = |reason: String| Error::UnsafeCenter {
        center: c.to_vec(),
        reason,
    };
    let rho = surface.rho();
    let lo = 0.9 * (rho.min() - cn);
    let hi = 1.1 * (rho.max() + cn);
    if !(lo > 0.0) {
        return Err(unsafe_center(format!(
            "|c| = {cn} is not below the minimal radius {}",
            rho.min()
        )));
    }
    let mut fields = vec![surface.f().clone()];
    fields.extend(ambient_gradient(surface.f()));
    let interp = Interpolant::many(&fields)?;

    let values: Result<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let z = grid.point(node);
            let eval = |t: f64| -> Result<(f64, f64)> {
                let p: Vec<f64> = z.iter().zip(c).map(|(zi, ci)| ci + t * zi).collect();
                let r = norm(&p);
                let u: Vec<f64> = p.iter().map(|v| v / r).collect();
                let vals = interp.evaluate_all(&u)?;
                let rho_u = vals[0].exp();
                let dr: f64 = p.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / r;
                // d/dt ρ(u) = ρ ⟨grad f, du/dt⟩ with du/dt = (z − u⟨u, z⟩)/r and grad f ⊥ u
                let uz: f64 = u.iter().zip(z).map(|(a, b)| a * b).sum();
                let drho: f64 = rho_u
                    * (0..d)
                        .map(|m| vals[1 + m] * (z[m] - u[m] * uz))
                        .sum::<f64>()
                    / r;
                Ok((r - rho_u, dr - drho))
            };
            let t = newton_bracketed(eval, lo, hi, RAY_TOLERANCE, 200).map_err(|e| match e {
                Error::Numeric(msg) => unsafe_center(msg),
                other => other,
            })?;
            Ok(t.ln())
        })
        .collect();
    RadialSurface::new(ScalarField::new(grid, values?)?, provenance)
}

/// `Φ(c) = (n+1)/Vol(S^n) ∮ z f_c(z) dV_σ`, the first-harmonic part of the profile about `c`.
pub fn phi_map(surface: &RadialSurface, c: &[f64]) -> Result<Vec<f64>> {
    Ok(obata_projection(reradialize(surface, c)?.f()).0)
}

/// Central finite-difference Jacobian of `Φ` at `c`.
pub fn phi_jacobian(surface: &RadialSurface, c: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let d = c.len();
    let mut jac = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut plus = c.to_vec();
        let mut minus = c.to_vec();
        plus[k] += step;
        minus[k] -= step;
        let fp = phi_map(surface, &plus)?;
        let fm = phi_map(surface, &minus)?;
        for m in 0..d {
            jac[(m, k)] = (fp[m] - fm[m]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Solves `Φ(c₀) = 0` starting from the origin.
pub fn solve_center(surface: &RadialSurface, tol: f64, max_iter: usize) -> Result<CenteringResult> {
    let d = surface.grid().ambient_dim();
    solve_center_from(surface, &vec![0.0; d], tol, max_iter)
}

/// Damped quasi-Newton iteration for `Φ(c₀) = 0` from a given start.
///
/// Near a round sphere `f_c ≈ f − (c, ·)`, so `Φ(c) ≈ Φ(0) − c`; the secant
/// Jacobian starts at `−I` and is updated by Broyden's rule. A step is halved
/// while `|Φ|` does not decrease (at most six times); if that fails the
/// Jacobian is rebuilt by finite differences once before giving up.
pub fn solve_center_from(
    surface: &RadialSurface,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CenteringResult> {
    let d = surface.grid().ambient_dim();
    if start.len() != d {
        return Err(Error::DirectionLength {
            expected: d,
            got: start.len(),
        });
    }
    let mut c = DVector::from_column_slice(start);
    let mut fc = reradialize(surface, c.as_slice())?;
    let mut phi = DVector::from_vec(obata_projection(fc.f()).0);
    let mut jac = -DMatrix::<f64>::identity(d, d);
    let mut iterations = 1;
    let mut refreshes = 0;
    let mut refreshed_here = false;

    while phi.norm() >= tol && iterations < max_iter {
        let step = match jac.clone().lu().solve(&(-&phi)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => -&phi,
        };
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &c + scale * &step;
            if let Ok(surf) = reradialize(surface, trial.as_slice()) {
                let tphi = DVector::from_vec(obata_projection(surf.f()).0);
                if tphi.norm() < phi.norm() {
                    accepted = Some((trial, surf, tphi));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, surf, tphi)) => {
                let dc = &trial - &c;
                let dphi = &tphi - &phi;
                let denom = dc.dot(&dc);
                if denom > 0.0 {
                    let resid = &dphi - &jac * &dc;
                    jac += resid * dc.transpose() / denom;
                }
                c = trial;
                fc = surf;
                phi = tphi;
                iterations += 1;
                refreshed_here = false;
            }
            None if !refreshed_here => {
                jac = phi_jacobian(surface, c.as_slice(), 1e-6)?;
                refreshes += 1;
                refreshed_here = true;
            }
            None => break,
        }
    }
    let residual = phi.norm();
    Ok(CenteringResult {
        c0: c.iter().copied().collect(),
        iterations,
        residual,
        recentred: fc,
        converged: residual < tol,
        jacobian_refreshes: refreshes,
    })
}
