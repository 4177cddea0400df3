//! Collocation derivatives on the sphere.
//!
//! Along a polar axis `a`, a band-limited function splits into a part that is
//! even under the antipodal map of the inner sphere (axes after `a`) and an
//! odd part. The even part is a polynomial in `cos θ_a`; the odd part is
//! `sin θ_a` times a polynomial in `cos θ_a`. Both are differentiated with the
//! Gauss-node collocation matrices in `cos θ_a`, which makes the operators
//! exact on spherical harmonics below the grid resolution.
//!
//! Mixed partials are taken outer axis first: `∂_b ∂_a f` with `a < b` is the
//! inner-axis derivative of `∂_a f`, which is still band-limited on the inner
//! sphere for every fixed outer angle.

use super::field::{ScalarField, TensorField, Valence};
use super::grid::SphereGrid;
use crate::Result;
use std::sync::Arc;

/// First and (optionally) second derivative of nodal values along one axis.
pub(crate) fn axis_derivatives(
    grid: &SphereGrid,
    v: &[f64],
    axis: usize,
    second: bool,
) -> (Vec<f64>, Vec<f64>) {
    if axis + 1 == grid.n() {
        azimuth_derivatives(grid, v, second)
    } else {
        polar_derivatives(grid, v, axis, second)
    }
}

fn azimuth_derivatives(grid: &SphereGrid, v: &[f64], second: bool) -> (Vec<f64>, Vec<f64>) {
    let ax = &grid.azimuth;
    let m = ax.phi.len();
    let mut d1 = vec![0.0; v.len()];
    let mut d2 = if second {
        vec![0.0; v.len()]
    } else {
        Vec::new()
    };
    for start in (0..v.len()).step_by(m) {
        let line = &v[start..start + m];
        for i in 0..m {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for (j, &lj) in line.iter().enumerate() {
                s1 += ax.d1[(i, j)] * lj;
                if second {
                    s2 += ax.d2[(i, j)] * lj;
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

fn polar_derivatives(
    grid: &SphereGrid,
    v: &[f64],
    axis: usize,
    second: bool,
) -> (Vec<f64>, Vec<f64>) {
    let ax = &grid.polar[axis];
    let perm = &grid.antipodes[axis];
    let m = ax.cos.len();
    let stride = grid.strides[axis];
    let mut d1 = vec![0.0; v.len()];
    let mut d2 = if second {
        vec![0.0; v.len()]
    } else {
        Vec::new()
    };
    let mut even = vec![0.0; m];
    let mut odd = vec![0.0; m];
    let matvec = |mat: &nalgebra::DMatrix<f64>, x: &[f64], i: usize| -> f64 {
        x.iter().enumerate().map(|(j, &xj)| mat[(i, j)] * xj).sum()
    };
    for &start in grid.line_starts(axis) {
        for i in 0..m {
            let idx = start + i * stride;
            let w = v[perm[idx]];
            even[i] = 0.5 * (v[idx] + w);
            odd[i] = 0.5 * (v[idx] - w) / ax.sin[i];
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
                d2[idx] = -c * de + s * s * d2e - s * q - 3.0 * s * c * dq + s * s * s * d2q;
            }
        }
    }
    (d1, d2)
}

/// Coordinate partials `∂_i f` as a covector field.
pub fn grad(field: &ScalarField) -> TensorField {
    let grid = field.grid();
    let n = grid.n();
    let mut out = TensorField::zeros(grid.clone(), Valence::Covector, false);
    for a in 0..n {
        let (d1, _) = axis_derivatives(grid, field.values(), a, false);
        for (node, v) in d1.into_iter().enumerate() {
            out.at_mut(node)[a] = v;
        }
    }
    out
}

/// Raw second partials `∂²_{ij} f`, together with the first partials.
pub fn partials(field: &ScalarField) -> (TensorField, TensorField) {
    let grid = field.grid();
    let n = grid.n();
    let mut first = TensorField::zeros(grid.clone(), Valence::Covector, false);
    let mut second = TensorField::zeros(grid.clone(), Valence::Covariant2, true);
    let mut firsts = Vec::with_capacity(n);
    for a in 0..n {
        let (d1, d2) = axis_derivatives(grid, field.values(), a, true);
        for node in 0..grid.len() {
            first.at_mut(node)[a] = d1[node];
            second.at_mut(node)[a * n + a] = d2[node];
        }
        firsts.push(d1);
    }
    for a in 0..n {
        for b in a + 1..n {
            let (dab, _) = axis_derivatives(grid, &firsts[a], b, false);
            for (node, v) in dab.into_iter().enumerate() {
                let s = second.at_mut(node);
                s[a * n + b] = v;
                s[b * n + a] = v;
            }
        }
    }
    (first, second)
}

/// Covariant Hessian `∇²_{ij} f = ∂²_{ij} f − Γ^k_{ij} ∂_k f` of the round metric.
pub fn hessian(field: &ScalarField) -> TensorField {
    let (first, second) = partials(field);
    hessian_from_partials(&first, &second)
}

pub(crate) fn hessian_from_partials(first: &TensorField, second: &TensorField) -> TensorField {
    let grid = first.grid().clone();
    let n = grid.n();
    let mut out = second.clone();
    for node in 0..grid.len() {
        let gamma = grid.sigma_christoffel(node);
        let df = first.at(node).to_vec();
        let h = out.at_mut(node);
        for i in 0..n {
            for j in 0..n {
                let corr: f64 = (0..n).map(|k| gamma[(k * n + i) * n + j] * df[k]).sum();
                h[i * n + j] -= corr;
            }
        }
    }
    out
}

/// Laplace–Beltrami operator of the round metric, `Δ = σ^{ij} ∇²_{ij}` (negative spectrum).
pub fn laplace(field: &ScalarField) -> ScalarField {
    let h = hessian(field);
    trace_sigma(&h)
}

/// `σ^{ij} T_{ij}` for a covariant 2-tensor.
pub fn trace_sigma(t: &TensorField) -> ScalarField {
    let grid = t.grid().clone();
    let n = grid.n();
    let values = (0..grid.len())
        .map(|node| {
            let sig = grid.sigma_diag(node);
            (0..n).map(|a| t.get(node, a, a) / sig[a]).sum()
        })
        .collect();
    ScalarField::new(grid, values).expect("trace has one value per node")
}

/// `grad_σ h` as `n + 1` ambient component fields.
pub fn ambient_gradient(field: &ScalarField) -> Vec<ScalarField> {
    covector_to_ambient(&grad(field))
}

/// Raises a covector with `σ` and writes it in ambient components.
pub fn covector_to_ambient(df: &TensorField) -> Vec<ScalarField> {
    let grid = df.grid().clone();
    let n = grid.n();
    let d = n + 1;
    let mut comps = vec![vec![0.0; grid.len()]; d];
    for node in 0..grid.len() {
        let sig = grid.sigma_diag(node);
        let w = df.at(node);
        for a in 0..n {
            let e = grid.tangent(node, a);
            let coef = w[a] / sig[a];
            for m in 0..d {
                comps[m][node] += coef * e[m];
            }
        }
    }
    comps
        .into_iter()
        .map(|v| ScalarField::new(grid.clone(), v).expect("one value per node"))
        .collect()
}

/// Divergence `∇_i T^i_k` of a mixed tensor with respect to the round metric.
///
/// The tensor is rewritten as an ambient `(n+1) × (n+1)` matrix field
/// `M = T^i_k e_i ⊗ σ^{kk} e_k`, whose entries are smooth functions on the
/// sphere; then `(div T)_b = Σ_a (grad_σ M_{ab})_a` and the result is pulled
/// back to coordinates.
pub fn divergence_mixed(t: &TensorField) -> Result<TensorField> {
    assert_eq!(t.valence(), Valence::Mixed);
    let grid: Arc<SphereGrid> = t.grid().clone();
    let n = grid.n();
    let d = n + 1;
    let mut ambient = vec![vec![0.0; grid.len()]; d * d];
    for node in 0..grid.len() {
        let sig = grid.sigma_diag(node);
        let comps = t.at(node);
        for i in 0..n {
            let ei = grid.tangent(node, i);
            for k in 0..n {
                let coef = comps[i * n + k] / sig[k];
                if coef == 0.0 {
                    continue;
                }
                let ek = grid.tangent(node, k);
                for a in 0..d {
                    for b in 0..d {
                        ambient[a * d + b][node] += coef * ei[a] * ek[b];
                    }
                }
            }
        }
    }
    let mut div = vec![vec![0.0; grid.len()]; d];
    for a in 0..d {
        for b in 0..d {
            let entry = ScalarField::new(grid.clone(), std::mem::take(&mut ambient[a * d + b]))?;
            let g = ambient_gradient(&entry);
            for node in 0..grid.len() {
                div[b][node] += g[a].values()[node];
            }
        }
    }
    let mut out = TensorField::zeros(grid.clone(), Valence::Covector, false);
    for node in 0..grid.len() {
        for k in 0..n {
            let ek = grid.tangent(node, k);
            out.at_mut(node)[k] = (0..d).map(|b| div[b][node] * ek[b]).sum();
        }
    }
    Ok(out)
}
