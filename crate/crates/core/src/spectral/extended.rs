//! Double-double versions of the collocation operators.
//!
//! Residuals built from third derivatives of `f` stop converging near
//! `1e-11` in double precision, because collocation differentiation amplifies
//! roundoff by a power of the node count. Repeating the same operators in
//! double-double arithmetic (about 32 significant digits) pushes that floor
//! far below the truncation error of any practical grid.
//!
//! The grid's `f64` nodes are taken as exact; interpolation is exact on any
//! node set, so only the azimuthal angles need to be recomputed.

use super::grid::SphereGrid;
use std::sync::Arc;
use twofloat::consts::{FRAC_PI_2, LN_2, PI};
use twofloat::TwoFloat;

pub type Dd = TwoFloat;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

fn zero() -> Dd {
    Dd::from(0.0)
}

/// `a / b` to double-double accuracy; the library quotient keeps only about
/// 17 digits.
pub fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

pub fn recip(b: Dd) -> Dd {
    div(dd(1.0), b)
}

/// `(sin x, cos x)` to double-double accuracy for moderate `|x|`.
pub fn sin_cos(x: Dd) -> (Dd, Dd) {
    let q = (x.hi() / FRAC_PI_2.hi()).round();
    let r = x - FRAC_PI_2 * q;
    let r2 = r * r;
    // Taylor series on |r| ≤ π/4
    let (mut s, mut c) = (r, dd(1.0));
    let (mut ts, mut tc) = (r, dd(1.0));
    for k in 1..40 {
        let k = k as f64;
        ts = -ts * r2 / ((2.0 * k) * (2.0 * k + 1.0));
        tc = -tc * r2 / ((2.0 * k - 1.0) * (2.0 * k));
        s += ts;
        c += tc;
        if ts.hi().abs() < 1e-36 && tc.hi().abs() < 1e-36 {
            break;
        }
    }
    match (q as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// `e^x` to double-double accuracy.
pub fn exp(x: Dd) -> Dd {
    let k = (x.hi() / LN_2.hi()).round();
    let r = (x - LN_2 * k) / 32.0;
    let mut sum = dd(1.0);
    let mut term = dd(1.0);
    for j in 1..20 {
        term = term * r / j as f64;
        sum += term;
        if term.hi().abs() < 1e-36 {
            break;
        }
    }
    for _ in 0..5 {
        sum = sum * sum;
    }
    sum * 2f64.powi(k as i32)
}

struct PolarLine {
    cos: Vec<Dd>,
    sin: Vec<Dd>,
    d1: Vec<Dd>,
    d2: Vec<Dd>,
}

impl PolarLine {
    fn new(nodes: &[f64]) -> Self {
        let m = nodes.len();
        let cos: Vec<Dd> = nodes.iter().map(|&c| dd(c)).collect();
        let sin = cos.iter().map(|&c| (dd(1.0) - c * c).sqrt()).collect();
        let diff = |i: usize, j: usize| Dd::new_sub(nodes[i], nodes[j]);
        let bary: Vec<Dd> = (0..m)
            .map(|j| {
                let mut p = dd(1.0);
                for k in (0..m).filter(|&k| k != j) {
                    p *= diff(j, k);
                }
                recip(p)
            })
            .collect();
        let mut d1 = vec![zero(); m * m];
        let mut d2 = vec![zero(); m * m];
        for i in 0..m {
            let mut row = zero();
            for j in (0..m).filter(|&j| j != i) {
                let v = div(bary[j], bary[i] * diff(i, j));
                d1[i * m + j] = v;
                row += v;
            }
            d1[i * m + i] = -row;
        }
        for i in 0..m {
            let mut row = zero();
            for j in (0..m).filter(|&j| j != i) {
                let v = d1[i * m + j] * 2.0 * (d1[i * m + i] - recip(diff(i, j)));
                d2[i * m + j] = v;
                row += v;
            }
            d2[i * m + i] = -row;
        }
        PolarLine { cos, sin, d1, d2 }
    }
}

struct AzimuthLine {
    cos: Vec<Dd>,
    sin: Vec<Dd>,
    /// Entries of the circulant derivative matrices by offset `i − j mod len`.
    d1: Vec<Dd>,
    d2: Vec<Dd>,
}

impl AzimuthLine {
    fn new(len: usize) -> Self {
        let angle = |j: usize| PI * (2 * j) as f64 / len as f64;
        let (sin, cos) = (0..len).map(|j| sin_cos(angle(j))).unzip();
        let mut d1 = vec![zero(); len];
        let mut d2 = vec![zero(); len];
        for k in 1..len {
            let (s, c) = sin_cos(PI * k as f64 / len as f64);
            let sign = if k % 2 == 0 { 0.5 } else { -0.5 };
            d1[k] = div(c, s) * sign;
            d2[k] = -recip(s * s) * sign;
        }
        d1[0] = -d1[1..].iter().fold(zero(), |a, &b| a + b);
        d2[0] = -d2[1..].iter().fold(zero(), |a, &b| a + b);
        AzimuthLine { cos, sin, d1, d2 }
    }
}

/// Double-double companion of a [`SphereGrid`].
pub struct ExtendedGrid {
    grid: Arc<SphereGrid>,
    polar: Vec<PolarLine>,
    azimuth: AzimuthLine,
    /// Per node: `(cos, sin)` of every axis, polar axes first.
    trig: Vec<(Vec<Dd>, Vec<Dd>)>,
}

impl ExtendedGrid {
    pub fn new(grid: &Arc<SphereGrid>) -> Self {
        let n = grid.n();
        let polar: Vec<PolarLine> = grid
            .polar
            .iter()
            .map(|ax| PolarLine::new(&ax.cos))
            .collect();
        let azimuth = AzimuthLine::new(grid.shape()[n - 1]);
        let trig = (0..grid.len())
            .map(|node| {
                let idx = grid.unravel(node);
                let mut c: Vec<Dd> = (0..n - 1).map(|a| polar[a].cos[idx[a]]).collect();
                let mut s: Vec<Dd> = (0..n - 1).map(|a| polar[a].sin[idx[a]]).collect();
                c.push(azimuth.cos[idx[n - 1]]);
                s.push(azimuth.sin[idx[n - 1]]);
                (c, s)
            })
            .collect();
        ExtendedGrid {
            grid: Arc::clone(grid),
            polar,
            azimuth,
            trig,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    /// `(cos, sin)` of every angle at a node, polar axes first.
    pub fn trig(&self, node: usize) -> (&[Dd], &[Dd]) {
        let (c, s) = &self.trig[node];
        (c, s)
    }

    /// Diagonal of `σ` at a node.
    pub fn sigma_diag(&self, node: usize) -> Vec<Dd> {
        let n = self.grid.n();
        let sin = &self.trig[node].1;
        let mut out = Vec::with_capacity(n);
        let mut prefix = dd(1.0);
        for a in 0..n {
            out.push(prefix * prefix);
            prefix *= sin[a];
        }
        out
    }

    /// `Γ^k_{ij}` of `σ` at a node, indexed `[k][i][j]`.
    pub fn christoffel(&self, node: usize) -> Vec<Dd> {
        let n = self.grid.n();
        let (cos, sin) = &self.trig[node];
        let sig = self.sigma_diag(node);
        let mut gamma = vec![zero(); n * n * n];
        let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
        for k in 1..n {
            for i in 0..k {
                let cot = div(cos[i], sin[i]);
                gamma[at(i, k, k)] = -div(sig[k], sig[i]) * cot;
                gamma[at(k, i, k)] = cot;
                gamma[at(k, k, i)] = cot;
            }
        }
        gamma
    }

    /// Coordinate frame `∂x/∂θ_a` at a node, `n` ambient vectors.
    pub fn frame(&self, node: usize) -> Vec<Vec<Dd>> {
        let n = self.grid.n();
        let d = n + 1;
        let (cos, sin) = &self.trig[node];
        let mut prefix = vec![dd(1.0); n];
        for a in 1..n {
            prefix[a] = prefix[a - 1] * sin[a - 1];
        }
        let mut x = vec![zero(); d];
        for a in 0..n - 1 {
            x[n - a] = prefix[a] * cos[a];
        }
        x[0] = prefix[n - 1] * cos[n - 1];
        x[1] = prefix[n - 1] * sin[n - 1];
        let mut frame = vec![vec![zero(); d]; n];
        for a in 0..n - 1 {
            let cot = div(cos[a], sin[a]);
            for m in 0..n - a {
                frame[a][m] = x[m] * cot;
            }
            frame[a][n - a] = -prefix[a] * sin[a];
        }
        frame[n - 1][0] = -x[1];
        frame[n - 1][1] = x[0];
        frame
    }

    /// First and (optionally) second derivative along one axis.
    pub fn axis_derivatives(&self, v: &[Dd], axis: usize, second: bool) -> (Vec<Dd>, Vec<Dd>) {
        if axis + 1 == self.grid.n() {
            self.azimuth_derivatives(v, second)
        } else {
            self.polar_derivatives(v, axis, second)
        }
    }

    fn azimuth_derivatives(&self, v: &[Dd], second: bool) -> (Vec<Dd>, Vec<Dd>) {
        let ax = &self.azimuth;
        let m = ax.d1.len();
        let mut d1 = vec![zero(); v.len()];
        let mut d2 = if second {
            vec![zero(); v.len()]
        } else {
            Vec::new()
        };
        for start in (0..v.len()).step_by(m) {
            let line = &v[start..start + m];
            for i in 0..m {
                let (mut s1, mut s2) = (zero(), zero());
                for (j, &lj) in line.iter().enumerate() {
                    let k = (i + m - j) % m;
                    s1 += ax.d1[k] * lj;
                    if second {
                        s2 += ax.d2[k] * lj;
                    }
                }
                d1[start + i] = s1;
                if second {
                    d2[start + i] = s2;
                }
            }
        }
        (d1, d2)
    }

    fn polar_derivatives(&self, v: &[Dd], axis: usize, second: bool) -> (Vec<Dd>, Vec<Dd>) {
        let ax = &self.polar[axis];
        let perm = &self.grid.antipodes[axis];
        let m = ax.cos.len();
        let stride = self.grid.strides[axis];
        let mut d1 = vec![zero(); v.len()];
        let mut d2 = if second {
            vec![zero(); v.len()]
        } else {
            Vec::new()
        };
        let mut even = vec![zero(); m];
        let mut odd = vec![zero(); m];
        let matvec = |mat: &[Dd], x: &[Dd], i: usize| -> Dd {
            x.iter()
                .enumerate()
                .fold(zero(), |acc, (j, &xj)| acc + mat[i * m + j] * xj)
        };
        for &start in self.grid.line_starts(axis) {
            for i in 0..m {
                let idx = start + i * stride;
                let w = v[perm[idx]];
                even[i] = (v[idx] + w) * 0.5;
                odd[i] = div((v[idx] - w) * 0.5, ax.sin[i]);
            }
            for i in 0..m {
                let (c, s) = (ax.cos[i], ax.sin[i]);
                let de = matvec(&ax.d1, &even, i);
                let dq = matvec(&ax.d1, &odd, i);
                let q = odd[i];
                let idx = start + i * stride;
                d1[idx] = -s * de + c * q - s * s * dq;
                if second {
                    let d2e = matvec(&ax.d2, &even, i);
                    let d2q = matvec(&ax.d2, &odd, i);
                    d2[idx] = -c * de + s * s * d2e - s * q - s * c * dq * 3.0 + s * s * s * d2q;
                }
            }
        }
        (d1, d2)
    }

    /// Coordinate partials, `[axis][node]`.
    pub fn grad(&self, v: &[Dd]) -> Vec<Vec<Dd>> {
        (0..self.grid.n())
            .map(|a| self.axis_derivatives(v, a, false).0)
            .collect()
    }

    /// First partials `[a][node]` and second partials `[a][b][node]`, mixed
    /// partials outer axis first.
    #[allow(clippy::type_complexity)]
    pub fn partials(&self, v: &[Dd]) -> (Vec<Vec<Dd>>, Vec<Vec<Vec<Dd>>>) {
        let n = self.grid.n();
        let mut first = Vec::with_capacity(n);
        let mut second = vec![vec![Vec::new(); n]; n];
        for a in 0..n {
            let (d1, d2) = self.axis_derivatives(v, a, true);
            second[a][a] = d2;
            first.push(d1);
        }
        for a in 0..n {
            for b in a + 1..n {
                let (dab, _) = self.axis_derivatives(&first[a], b, false);
                second[b][a] = dab.clone();
                second[a][b] = dab;
            }
        }
        (first, second)
    }

    /// `∇_i T^i_k` of a node-major mixed tensor field, via the ambient matrix field.
    pub fn divergence_mixed(&self, t: &[Dd]) -> Vec<Dd> {
        let grid = &self.grid;
        let n = grid.n();
        let d = n + 1;
        let len = grid.len();
        let frames: Vec<Vec<Vec<Dd>>> = (0..len).map(|node| self.frame(node)).collect();
        let sigmas: Vec<Vec<Dd>> = (0..len).map(|node| self.sigma_diag(node)).collect();
        let mut ambient = vec![vec![zero(); len]; d * d];
        for node in 0..len {
            let (e, sig) = (&frames[node], &sigmas[node]);
            for i in 0..n {
                for k in 0..n {
                    let coef = div(t[(node * n + i) * n + k], sig[k]);
                    for a in 0..d {
                        for b in 0..d {
                            ambient[a * d + b][node] += coef * e[i][a] * e[k][b];
                        }
                    }
                }
            }
        }
        let mut ambient_div = vec![vec![zero(); len]; d];
        for a in 0..d {
            for b in 0..d {
                let g = self.grad(&ambient[a * d + b]);
                for node in 0..len {
                    // a-th ambient component of grad_σ of this entry
                    let (e, sig) = (&frames[node], &sigmas[node]);
                    let mut s = zero();
                    for c in 0..n {
                        s += div(g[c][node], sig[c]) * e[c][a];
                    }
                    ambient_div[b][node] += s;
                }
            }
        }
        let mut out = vec![zero(); len * n];
        for node in 0..len {
            let e = &frames[node];
            for k in 0..n {
                out[node * n + k] =
                    (0..d).fold(zero(), |acc, b| acc + ambient_div[b][node] * e[k][b]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_functions() {
        let (s, c) = sin_cos(dd(0.7));
        assert!((s * s + c * c - 1.0).hi().abs() < 1e-31);
        let (s, c) = sin_cos(PI / 6.0);
        assert!((s - 0.5).hi().abs() < 1e-31);
        assert!((c * c - 0.75).hi().abs() < 1e-31);
        let e = exp(dd(1.0));
        // e = 2.718281828459045 + 1.4456468917292502e-16 + O(1e-33)
        assert!(
            (e - Dd::new_add(2.718281828459045, 1.4456468917292502e-16))
                .hi()
                .abs()
                < 1e-30
        );
        let x = dd(-3.25);
        assert!((exp(x) * exp(-x) - 1.0).hi().abs() < 1e-29);
    }

    #[test]
    fn derivatives_agree_with_double_precision() {
        use crate::spectral::{partials, ScalarField};
        let grid = SphereGrid::new(2, &[12, 24]).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| x[0] * x[1] + 0.3 * x[2] * x[2] * x[0]);
        let ext = ExtendedGrid::new(&grid);
        let v: Vec<Dd> = f.values().iter().map(|&x| dd(x)).collect();
        let (first, second) = ext.partials(&v);
        let (f1, f2) = partials(&f);
        for node in 0..grid.len() {
            for a in 0..2 {
                assert!((first[a][node].hi() - f1.at(node)[a]).abs() < 1e-12);
                for b in 0..2 {
                    assert!((second[a][b][node].hi() - f2.get(node, a, b)).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn divergence_of_identity_vanishes_to_extended_precision() {
        let grid = SphereGrid::new(3, &[8, 8, 16]).unwrap();
        let ext = ExtendedGrid::new(&grid);
        let n = 3;
        let mut t = vec![zero(); grid.len() * n * n];
        for node in 0..grid.len() {
            for i in 0..n {
                t[(node * n + i) * n + i] = dd(1.0);
            }
        }
        let div = ext.divergence_mixed(&t);
        assert!(div.iter().all(|v| v.hi().abs() < 1e-27));
    }
}
