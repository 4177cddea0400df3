//! Geometry of a radial graph `ψ(x) = e^{f(x)} x` over `S^n`.
//!
//! Notation used below: `f_i = ∂_i f`, `f^i = σ^{ij} f_j`, `h = ∇²f` (round
//! Hessian) and `W = √(1 + |∇f|²_σ)`.

use crate::spectral::calculus::{hessian_from_partials, partials};
use crate::spectral::norms::{integrate, sup_norm};
use crate::spectral::{Christoffel, Metric, ScalarField, SphereGrid, TensorField, Valence};
use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::sync::Arc;

/// Largest admissible `|f|` at any node.
pub const MAX_LOG_RADIUS: f64 = 50.0;

/// A star-shaped hypersurface given by its log-radial profile.
#[derive(Debug, Clone)]
pub struct RadialSurface {
    f: ScalarField,
    provenance: String,
}

impl RadialSurface {
    pub fn new(f: ScalarField, provenance: impl Into<String>) -> Result<Self> {
        if let Some(bad) = f.values().iter().find(|v| !v.is_finite()) {
            return Err(Error::DegenerateProfile(format!("non-finite value {bad}")));
        }
        let sup = sup_norm(&f);
        if sup > MAX_LOG_RADIUS {
            return Err(Error::DegenerateProfile(format!(
                "|f| reaches {sup}, above {MAX_LOG_RADIUS}"
            )));
        }
        Ok(RadialSurface {
            f,
            provenance: provenance.into(),
        })
    }

    /// The unit sphere on a grid.
    pub fn round(grid: Arc<SphereGrid>) -> Self {
        RadialSurface {
            f: ScalarField::constant(grid, 0.0),
            provenance: "sphere".into(),
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.f.grid()
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// `ρ = e^f`.
    pub fn rho(&self) -> ScalarField {
        self.f.map(f64::exp)
    }

    /// The surface scaled by `e^t`.
    pub fn shifted(&self, t: f64) -> Result<Self> {
        RadialSurface::new(self.f.map(|v| v + t), self.provenance.clone())
    }

    /// Ambient position `ψ(x) = e^{f(x)} x` of a node.
    pub fn position(&self, node: usize) -> Vec<f64> {
        let r = self.f.values()[node].exp();
        self.grid().point(node).iter().map(|x| r * x).collect()
    }

    pub fn geometry(&self) -> Result<GeometryBundle> {
        GeometryBundle::new(self)
    }
}

/// Every pointwise geometric quantity of a radial surface, computed in one pass.
#[derive(Debug, Clone)]
pub struct GeometryBundle {
    pub grid: Arc<SphereGrid>,
    /// `∂_i f`.
    pub df: TensorField,
    /// Raw coordinate second partials `∂²_{ij} f`.
    pub d2f: TensorField,
    /// Round Hessian `∇²_{ij} f`.
    pub hess: TensorField,
    /// `W = √(1 + |∇f|²_σ)`.
    pub w: ScalarField,
    pub g: TensorField,
    pub g_inv: TensorField,
    /// Outward unit normal, `n + 1` ambient components per node.
    pub normal: Vec<f64>,
    pub a: TensorField,
    /// `A^i_j = g^{ik} A_{kj}`.
    pub shape_op: TensorField,
    /// Largest deviation between `g^{-1} A` and the closed-form shape operator.
    pub shape_op_mismatch: f64,
    pub h: ScalarField,
    pub a_traceless: TensorField,
    /// `dV_g / dV_σ`.
    pub vol_density: ScalarField,
    pub christoffel: Christoffel,
}

impl GeometryBundle {
    pub fn new(surface: &RadialSurface) -> Result<Self> {
        let grid = surface.grid().clone();
        let n = grid.n();
        let d = n + 1;
        let f = surface.f();
        let (df, d2f) = partials(f);
        let hess = hessian_from_partials(&df, &d2f);
        let len = grid.len();

        let mut w = vec![0.0; len];
        let mut g = TensorField::zeros(grid.clone(), Valence::Covariant2, true);
        let mut g_inv = TensorField::zeros(grid.clone(), Valence::Contravariant2, true);
        let mut normal = vec![0.0; len * d];
        let mut a = TensorField::zeros(grid.clone(), Valence::Covariant2, true);
        let mut shape_op = TensorField::zeros(grid.clone(), Valence::Mixed, false);
        let mut h = vec![0.0; len];
        let mut a_traceless = TensorField::zeros(grid.clone(), Valence::Covariant2, true);
        let mut density = vec![0.0; len];
        let mut gamma = Vec::with_capacity(len * n * n * n);
        let mut mismatch = 0.0f64;

        for node in 0..len {
            let sig = grid.sigma_diag(node);
            let fi = df.at(node);
            let hij = hess.at(node);
            let fv = f.values()[node];
            let e2f = (2.0 * fv).exp();
            let up: Vec<f64> = (0..n).map(|i| fi[i] / sig[i]).collect();
            let grad_sq: f64 = (0..n).map(|i| fi[i] * up[i]).sum();
            let w2 = 1.0 + grad_sq;
            let wn = w2.sqrt();
            w[node] = wn;

            {
                let gn = g.at_mut(node);
                for i in 0..n {
                    for j in 0..n {
                        let s = if i == j { sig[i] } else { 0.0 };
                        gn[i * n + j] = e2f * (s + fi[i] * fi[j]);
                    }
                }
            }
            {
                let gi = g_inv.at_mut(node);
                for i in 0..n {
                    for j in 0..n {
                        let s = if i == j { 1.0 / sig[i] } else { 0.0 };
                        gi[i * n + j] = (s - up[i] * up[j] / w2) / e2f;
                    }
                }
            }

            let x = grid.point(node);
            let nu = &mut normal[node * d..(node + 1) * d];
            nu.copy_from_slice(x);
            for k in 0..n {
                let e = grid.tangent(node, k);
                for m in 0..d {
                    nu[m] -= up[k] * e[m];
                }
            }
            nu.iter_mut().for_each(|v| *v /= wn);

            let scale = fv.exp() / wn;
            {
                let an = a.at_mut(node);
                for i in 0..n {
                    for j in 0..n {
                        let s = if i == j { sig[i] } else { 0.0 };
                        an[i * n + j] =
                            scale * (s + fi[i] * fi[j] - 0.5 * (hij[i * n + j] + hij[j * n + i]));
                    }
                }
            }

            let gi = g_inv.at(node).to_vec();
            let an = a.at(node).to_vec();
            let so = shape_op.at_mut(node);
            for i in 0..n {
                for j in 0..n {
                    so[i * n + j] = (0..n).map(|k| gi[i * n + k] * an[k * n + j]).sum();
                }
            }
            // closed form e^{-f}/W (δ^i_j − h^i_j + f^i (h∇f)_j / W²)
            let hdf: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|k| hij[k * n + j] * up[k]).sum())
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let closed =
                        (-fv).exp() / wn * (delta - hij[i * n + j] / sig[i] + up[i] * hdf[j] / w2);
                    mismatch = mismatch.max((closed - so[i * n + j]).abs());
                }
            }
            let mean = (0..n).map(|i| so[i * n + i]).sum::<f64>() / n as f64;
            h[node] = mean;
            let gn = g.at(node).to_vec();
            let tl = a_traceless.at_mut(node);
            for k in 0..n * n {
                tl[k] = an[k] - mean * gn[k];
            }
            density[node] = (n as f64 * fv).exp() * wn;

            // _gΓ^k_ij = Γ^k_ij + h_ij f^k / W² + f_i δ^k_j + f_j δ^k_i − f^k (σ_ij + f_i f_j) / W²
            let round = grid.sigma_christoffel(node);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let s = if i == j { sig[i] } else { 0.0 };
                        let mut v = round[(k * n + i) * n + j];
                        v += hij[i * n + j] * up[k] / w2;
                        if k == j {
                            v += fi[i];
                        }
                        if k == i {
                            v += fi[j];
                        }
                        v -= up[k] * (s + fi[i] * fi[j]) / w2;
                        gamma.push(v);
                    }
                }
            }
        }

        Ok(GeometryBundle {
            w: ScalarField::new(grid.clone(), w)?,
            g,
            g_inv,
            normal,
            a,
            shape_op,
            shape_op_mismatch: mismatch,
            h: ScalarField::new(grid.clone(), h)?,
            a_traceless,
            vol_density: ScalarField::new(grid.clone(), density)?,
            christoffel: Christoffel::from_data(grid.clone(), gamma),
            df,
            d2f,
            hess,
            grid,
        })
    }

    /// The induced metric packaged for norms and integrals.
    pub fn metric(&self) -> Metric {
        Metric {
            g: self.g.clone(),
            g_inv: self.g_inv.clone(),
            density: self.vol_density.clone(),
        }
    }

    pub fn normal_at(&self, node: usize) -> &[f64] {
        let d = self.grid.ambient_dim();
        &self.normal[node * d..(node + 1) * d]
    }

    /// `Vol_n(Σ)`.
    pub fn volume(&self) -> f64 {
        integrate(&self.vol_density, None).expect("density lives on the bundle grid")
    }

    /// Eigenvalues of the shape operator at every node, ascending.
    pub fn principal_curvatures(&self) -> Vec<Vec<f64>> {
        let n = self.grid.n();
        (0..self.grid.len())
            .map(|node| {
                let g = DMatrix::from_row_slice(n, n, self.g.at(node));
                let a = DMatrix::from_row_slice(n, n, self.a.at(node));
                let chol = g.cholesky().expect("induced metric is positive definite");
                let l = chol.l();
                let l_inv = l
                    .clone()
                    .try_inverse()
                    .expect("triangular factor is invertible");
                let sym = &l_inv * a * l_inv.transpose();
                let sym = 0.5 * (&sym + sym.transpose());
                let mut ev: Vec<f64> = SymmetricEigen::new(sym)
                    .eigenvalues
                    .iter()
                    .copied()
                    .collect();
                ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
                ev
            })
            .collect()
    }

    /// `g^{ij} Å_{ij}` at every node.
    pub fn traceless_trace(&self) -> ScalarField {
        let n = self.grid.n();
        let values = (0..self.grid.len())
            .map(|node| {
                let gi = self.g_inv.at(node);
                let t = self.a_traceless.at(node);
                (0..n * n).map(|k| gi[k] * t[k]).sum()
            })
            .collect();
        ScalarField::new(self.grid.clone(), values).expect("one value per node")
    }

    /// Mixed traceless shape operator `Å^i_j = A^i_j − H δ^i_j`.
    pub fn traceless_mixed(&self) -> TensorField {
        let n = self.grid.n();
        let mut out = self.shape_op.clone();
        for node in 0..self.grid.len() {
            let hv = self.h.values()[node];
            let t = out.at_mut(node);
            for i in 0..n {
                t[i * n + i] -= hv;
            }
        }
        out
    }

    /// Largest `|g_ik g^{kj} − δ_i^j|` over nodes.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for node in 0..self.grid.len() {
            let g = self.g.at(node);
            let gi = self.g_inv.at(node);
            for i in 0..n {
                for j in 0..n {
                    let p: f64 = (0..n).map(|k| g[i * n + k] * gi[k * n + j]).sum();
                    let delta = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((p - delta).abs());
                }
            }
        }
        worst
    }

    /// Largest `|_g∇_k g_ij|` over nodes, with `∂_k g_ij` differentiated
    /// analytically from the collocated partials of `f`.
    pub fn metric_compatibility_residual(&self, surface: &RadialSurface) -> f64 {
        let grid = &self.grid;
        let n = grid.n();
        let mut worst = 0.0f64;
        for node in 0..grid.len() {
            let sig = grid.sigma_diag(node);
            let (cos, sin) = grid.polar_trig(node);
            let fi = self.df.at(node);
            let fij = self.d2f.at(node);
            let g = self.g.at(node);
            let e2f = (2.0 * surface.f().values()[node]).exp();
            let gamma = self.christoffel.at(node);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut dsig = 0.0;
                        if i == j && k < i && k < n - 1 {
                            dsig = 2.0 * cos[k] / sin[k] * sig[i];
                        }
                        let dg = 2.0 * fi[k] * g[i * n + j]
                            + e2f * (dsig + fij[k * n + i] * fi[j] + fi[i] * fij[k * n + j]);
                        let conn: f64 = (0..n)
                            .map(|l| {
                                gamma[(l * n + k) * n + i] * g[l * n + j]
                                    + gamma[(l * n + k) * n + j] * g[i * n + l]
                            })
                            .sum();
                        worst = worst.max((dg - conn).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `(g, g^{-1})`.
pub fn metric(surface: &RadialSurface) -> Result<(TensorField, TensorField)> {
    let b = surface.geometry()?;
    Ok((b.g, b.g_inv))
}

/// Unit normal, `n + 1` components per node.
pub fn unit_normal(surface: &RadialSurface) -> Result<Vec<f64>> {
    Ok(surface.geometry()?.normal)
}

/// `(A_ij, A^i_j)`.
pub fn second_fundamental_form(surface: &RadialSurface) -> Result<(TensorField, TensorField)> {
    let b = surface.geometry()?;
    Ok((b.a, b.shape_op))
}

/// `(H, Å)`.
pub fn mean_and_traceless(surface: &RadialSurface) -> Result<(ScalarField, TensorField)> {
    let b = surface.geometry()?;
    Ok((b.h, b.a_traceless))
}

pub fn volume_density(surface: &RadialSurface) -> Result<ScalarField> {
    Ok(surface.geometry()?.vol_density)
}

pub fn christoffel_g(surface: &RadialSurface) -> Result<Christoffel> {
    Ok(surface.geometry()?.christoffel)
}

/// Outcome of the pointwise convexity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convexity {
    pub is_convex: bool,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
}

/// Smallest principal curvature over the nodes against a relative tolerance.
pub fn convexity_check(bundle: &GeometryBundle) -> Convexity {
    let curv = bundle.principal_curvatures();
    let min = curv.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let sup = curv.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-9 * (1.0 + sup);
    Convexity {
        is_convex: min >= -tolerance,
        min_eigenvalue: min,
        tolerance,
    }
}

/// `Vol_n(Σ)`.
pub fn volume(surface: &RadialSurface) -> Result<f64> {
    Ok(surface.geometry()?.volume())
}

/// Rescales the surface so that `Vol_n(Σ) = Vol_n(S^n)`.
///
/// `Vol(f + t) = e^{nt} Vol(f)`, so a Newton step in `t` is exact up to
/// roundoff; a second step absorbs the roundoff of the first.
pub fn volume_normalize(surface: &RadialSurface) -> Result<RadialSurface> {
    let n = surface.grid().n() as f64;
    let target = surface.grid().sphere_volume();
    let mut out = surface.clone();
    for _ in 0..2 {
        let vol = volume(&out)?;
        if !(vol > 0.0 && vol.is_finite()) {
            return Err(Error::Numeric(format!("volume {vol} is not positive")));
        }
        let t = (target / vol).ln() / n;
        if t == 0.0 {
            break;
        }
        out = out.shifted(t)?;
    }
    Ok(out)
}

/// `sup |ρ − 1|`, the Hausdorff distance to the concentric unit sphere.
pub fn hausdorff_to_unit_sphere(surface: &RadialSurface) -> f64 {
    surface
        .f()
        .values()
        .iter()
        .fold(0.0, |m, v| m.max(v.exp_m1().abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(n: usize, shape: &[usize], f: impl Fn(&[f64]) -> f64) -> RadialSurface {
        let grid = SphereGrid::new(n, shape).unwrap();
        RadialSurface::new(ScalarField::from_fn(grid, f), "test").unwrap()
    }

    #[test]
    fn unit_sphere_geometry() {
        let s = surface(2, &[8, 16], |_| 0.0);
        let b = s.geometry().unwrap();
        let grid = s.grid();
        for node in 0..grid.len() {
            let sig = grid.sigma_diag(node);
            assert!((b.g.get(node, 0, 0) - sig[0]).abs() < 1e-15);
            assert!((b.g.get(node, 1, 1) - sig[1]).abs() < 1e-15);
            assert!((b.a.get(node, 1, 1) - sig[1]).abs() < 1e-15);
            assert!((b.shape_op.get(node, 0, 0) - 1.0).abs() < 1e-15);
            assert!((b.h.values()[node] - 1.0).abs() < 1e-15);
            for (nu, x) in b.normal_at(node).iter().zip(grid.point(node)) {
                assert!((nu - x).abs() < 1e-15);
            }
        }
        assert!(b.a_traceless.data().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn scaled_sphere() {
        let t = 0.3;
        let s = surface(3, &[6, 6, 12], |_| t);
        let b = s.geometry().unwrap();
        for node in 0..s.grid().len() {
            for i in 0..3 {
                assert!((b.shape_op.get(node, i, i) - (-t).exp()).abs() < 1e-12);
            }
            assert!((b.vol_density.values()[node] - (3.0 * t).exp()).abs() < 1e-13);
        }
        assert!(convexity_check(&b).is_convex);
        let normalized = volume_normalize(&s).unwrap();
        assert!(sup_norm(normalized.f()) < 1e-14);
        assert!((hausdorff_to_unit_sphere(&s) - t.exp_m1()).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_agree_on_perturbed_surface() {
        let s = surface(2, &[16, 32], |x| 0.1 * x[2] + 0.05 * x[0] * x[1]);
        let b = s.geometry().unwrap();
        assert!(b.shape_op_mismatch < 1e-12);
        assert!(b.inverse_residual() < 1e-12);
        assert!(sup_norm(&b.traceless_trace()) < 1e-13);
        assert!(b.christoffel.asymmetry() < 1e-14);
        assert!(b.metric_compatibility_residual(&s) < 1e-9);
        for node in 0..s.grid().len() {
            let nu = b.normal_at(node);
            let norm: f64 = nu.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn normalization_is_idempotent() {
        let s = surface(2, &[16, 32], |x| 0.1 * x[2] * x[2]);
        let once = volume_normalize(&s).unwrap();
        let twice = volume_normalize(&once).unwrap();
        let target = once.grid().sphere_volume();
        assert!((volume(&once).unwrap() - target).abs() < 1e-10);
        for (a, b) in once.f().values().iter().zip(twice.f().values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_extreme_profiles() {
        let grid = SphereGrid::new(2, &[4, 4]).unwrap();
        let f = ScalarField::constant(grid.clone(), 60.0);
        assert!(matches!(
            RadialSurface::new(f, ""),
            Err(Error::DegenerateProfile(_))
        ));
        let f = ScalarField::constant(grid, f64::NAN);
        assert!(RadialSurface::new(f, "").is_err());
    }
}
