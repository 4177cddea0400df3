//! Scalar root finding and one-dimensional minimization.

use crate::{Error, Result};

/// Safeguarded Newton iteration for a root of `f` inside `[lo, hi]`.
///
/// `f` returns `(F(t), F'(t))`. A Newton step is accepted only when it lands
/// strictly inside the current bracket; otherwise the bracket is bisected.
/// After three consecutive rejected steps the solver switches to pure
/// bisection. The bracket must change sign.
pub fn newton_bracketed(
    mut f: impl FnMut(f64) -> Result<(f64, f64)>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "root not bracketed: F({lo}) = {flo}, F({hi}) = {fhi}"
        )));
    }
    let mut t = 0.5 * (lo + hi);
    let mut rejected = 0;
    for _ in 0..max_iter {
        let (ft, dft) = f(t)?;
        if ft == 0.0 {
            return Ok(t);
        }
        if ft.signum() == flo.signum() {
            lo = t;
            flo = ft;
        } else {
            hi = t;
        }
        let newton = t - ft / dft;
        let accept = rejected < 3 && dft.is_finite() && dft != 0.0 && newton > lo && newton < hi;
        let next = if accept {
            newton
        } else {
            rejected += 1;
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= tol * (1.0 + t.abs()) || (hi - lo) <= tol * (1.0 + t.abs()) {
            return Ok(next);
        }
        t = next;
    }
    Err(Error::Numeric(format!(
        "no convergence in {max_iter} iterations"
    )))
}

/// Minimizer of a convex function on `[lo, hi]` by golden-section search.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Root of a monotone increasing function on `[lo, hi]` by bisection.
pub fn bisect_increasing(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
