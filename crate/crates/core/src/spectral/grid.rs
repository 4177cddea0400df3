//! Tensor-product collocation grids on `S^n` in hyperspherical coordinates.
//!
//! Coordinates are `(θ_1, …, θ_{n-1}, φ)` with
//!
//! ```text
//! x_{n+1} = cos θ_1
//! x_n     = sin θ_1 cos θ_2
//! …
//! x_3     = sin θ_1 ⋯ sin θ_{n-2} cos θ_{n-1}
//! x_1     = sin θ_1 ⋯ sin θ_{n-1} cos φ
//! x_2     = sin θ_1 ⋯ sin θ_{n-1} sin φ
//! ```
//!
//! so for `n = 2` this is the usual `(sin θ cos φ, sin θ sin φ, cos θ)`.
//! Polar axis `a` (0-based) carries the measure `sin^{n-1-a} θ dθ`; its
//! nodes are the Gauss points for that weight in `cos θ`, so no node ever
//! sits on a coordinate pole. The azimuthal axis is uniform.

use super::quadrature::{
    barycentric_weights, fourier_diff_matrices, polynomial_diff_matrices, sine_power_integral,
    GaussRule,
};
use crate::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub(crate) struct PolarAxis {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub weights: Vec<f64>,
    pub bary: Vec<f64>,
    /// Derivatives with respect to `cos θ`.
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct AzimuthAxis {
    pub phi: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

/// Collocation grid on the unit sphere `S^n`.
#[derive(Debug)]
pub struct SphereGrid {
    n: usize,
    shape: Vec<usize>,
    pub(crate) polar: Vec<PolarAxis>,
    pub(crate) azimuth: AzimuthAxis,
    pub(crate) strides: Vec<usize>,
    weights: Vec<f64>,
    points: Vec<f64>,
    frames: Vec<f64>,
    sigma: Vec<f64>,
    /// `antipodes[a][node]`: the node obtained by applying the antipodal map of
    /// the inner sphere spanned by the axes after `a`.
    pub(crate) antipodes: Vec<Vec<usize>>,
    line_starts: Vec<Vec<usize>>,
}

impl PartialEq for SphereGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.shape == other.shape
    }
}

impl SphereGrid {
    /// Builds the grid for `S^n` with per-axis node counts `(N_1, …, N_n)`;
    /// the last entry is the azimuthal count.
    pub fn new(n: usize, shape: &[usize]) -> Result<Arc<SphereGrid>> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let bad = |reason: &str| Error::InvalidShape {
            n,
            shape: shape.to_vec(),
            reason: reason.to_string(),
        };
        if shape.len() != n {
            return Err(bad("one node count per axis is required"));
        }
        if shape[..n - 1].iter().any(|&m| m < 4) {
            return Err(bad("polar axes need at least 4 nodes"));
        }
        let n_phi = shape[n - 1];
        if n_phi < 4 || n_phi % 2 != 0 {
            return Err(bad("azimuthal axis needs an even count of at least 4"));
        }

        let polar: Vec<PolarAxis> = (0..n - 1)
            .map(|a| {
                let rule = GaussRule::sine_power(shape[a], n - 1 - a);
                let sin = rule.nodes.iter().map(|c| (1.0 - c * c).sqrt()).collect();
                let bary = barycentric_weights(&rule.nodes);
                let (d1, d2) = polynomial_diff_matrices(&rule.nodes, &bary);
                PolarAxis {
                    cos: rule.nodes,
                    sin,
                    weights: rule.weights,
                    bary,
                    d1,
                    d2,
                }
            })
            .collect();
        let (ad1, ad2) = fourier_diff_matrices(n_phi);
        let azimuth = AzimuthAxis {
            phi: (0..n_phi)
                .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
                .collect(),
            d1: ad1,
            d2: ad2,
        };

        let mut strides = vec![1; n];
        for a in (0..n - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let total: usize = shape.iter().product();

        let mut grid = SphereGrid {
            n,
            shape: shape.to_vec(),
            polar,
            azimuth,
            strides,
            weights: Vec::with_capacity(total),
            points: Vec::with_capacity(total * (n + 1)),
            frames: Vec::with_capacity(total * n * (n + 1)),
            sigma: Vec::with_capacity(total * n),
            antipodes: Vec::new(),
            line_starts: Vec::new(),
        };

        let phi_weight = 2.0 * PI / n_phi as f64;
        let mut index = vec![0usize; n];
        for node in 0..total {
            grid.unravel_into(node, &mut index);
            let mut w = phi_weight;
            for a in 0..n - 1 {
                w *= grid.polar[a].weights[index[a]];
            }
            grid.weights.push(w);
            let (cos, sin) = grid.node_trig(&index);
            let (x, frame, sigma) = embedding(n, &cos, &sin);
            grid.points.extend_from_slice(&x);
            grid.frames.extend_from_slice(&frame);
            grid.sigma.extend_from_slice(&sigma);
        }

        grid.antipodes = (0..n)
            .map(|a| {
                (0..total)
                    .map(|node| {
                        let mut idx = grid.unravel(node);
                        for b in a + 1..n - 1 {
                            idx[b] = shape[b] - 1 - idx[b];
                        }
                        if a + 1 < n {
                            idx[n - 1] = (idx[n - 1] + n_phi / 2) % n_phi;
                        }
                        grid.ravel(&idx)
                    })
                    .collect()
            })
            .collect();
        grid.line_starts = (0..n)
            .map(|a| {
                (0..total)
                    .filter(|&node| (node / grid.strides[a]) % shape[a] == 0)
                    .collect()
            })
            .collect();
        Ok(Arc::new(grid))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Dimension of the ambient space, `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Vol_n(S^n)`, computed in closed form.
    pub fn sphere_volume(&self) -> f64 {
        2.0 * PI * (1..self.n).map(sine_power_integral).product::<f64>()
    }

    /// Unit vector in `R^{n+1}` of a node.
    pub fn point(&self, node: usize) -> &[f64] {
        let d = self.n + 1;
        &self.points[node * d..(node + 1) * d]
    }

    /// Coordinate tangent vector `∂x/∂θ_axis` at a node, in ambient components.
    pub fn tangent(&self, node: usize, axis: usize) -> &[f64] {
        let d = self.n + 1;
        let base = (node * self.n + axis) * d;
        &self.frames[base..base + d]
    }

    /// Diagonal of the round metric `σ_aa` at a node.
    pub fn sigma_diag(&self, node: usize) -> &[f64] {
        &self.sigma[node * self.n..(node + 1) * self.n]
    }

    /// Cosines and sines of the polar angles at a node.
    pub fn polar_trig(&self, node: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.unravel(node);
        let (c, s) = self.node_trig(&idx);
        (c[..self.n - 1].to_vec(), s[..self.n - 1].to_vec())
    }

    /// Hyperspherical angles `(θ_1, …, θ_{n-1}, φ)` of a node.
    pub fn angles(&self, node: usize) -> Vec<f64> {
        let idx = self.unravel(node);
        let mut out: Vec<f64> = (0..self.n - 1)
            .map(|a| self.polar[a].cos[idx[a]].acos())
            .collect();
        out.push(self.azimuth.phi[idx[self.n - 1]]);
        out
    }

    pub fn unravel(&self, node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        self.unravel_into(node, &mut idx);
        idx
    }

    fn unravel_into(&self, node: usize, idx: &mut [usize]) {
        for a in 0..self.n {
            idx[a] = (node / self.strides[a]) % self.shape[a];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub(crate) fn line_starts(&self, axis: usize) -> &[usize] {
        &self.line_starts[axis]
    }

    /// `(cos, sin)` for every axis at a multi-index; the last pair is for `φ`.
    fn node_trig(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut cos = Vec::with_capacity(n);
        let mut sin = Vec::with_capacity(n);
        for a in 0..n - 1 {
            cos.push(self.polar[a].cos[idx[a]]);
            sin.push(self.polar[a].sin[idx[a]]);
        }
        let phi = self.azimuth.phi[idx[n - 1]];
        cos.push(phi.cos());
        sin.push(phi.sin());
        (cos, sin)
    }

    /// Samples a function of the ambient unit vector at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|node| f(self.point(node))).collect()
    }

    /// Round metric `σ`, its inverse and Christoffel symbols `Γ^k_{ij}` at a node;
    /// the Christoffel array is indexed `[k][i][j]` flattened.
    pub fn sigma_christoffel(&self, node: usize) -> Vec<f64> {
        let n = self.n;
        let (cos, sin) = self.polar_trig(node);
        let sig = self.sigma_diag(node);
        let mut gamma = vec![0.0; n * n * n];
        let at = |k: usize, i: usize, j: usize| (k * n + i) * n + j;
        for k in 1..n {
            for i in 0..k {
                let cot = cos[i] / sin[i];
                // Γ^i_{kk} = -(σ_kk / σ_ii) cot θ_i, Γ^k_{ik} = Γ^k_{ki} = cot θ_i
                gamma[at(i, k, k)] = -sig[k] / sig[i] * cot;
                gamma[at(k, i, k)] = cot;
                gamma[at(k, k, i)] = cot;
            }
        }
        gamma
    }
}

/// Unit vector with hyperspherical angles `(θ_1, …, θ_{n-1}, φ)`.
pub fn point_from_angles(n: usize, angles: &[f64]) -> Vec<f64> {
    let cos: Vec<f64> = angles.iter().map(|a| a.cos()).collect();
    let sin: Vec<f64> = angles.iter().map(|a| a.sin()).collect();
    embedding(n, &cos, &sin).0
}

/// Ambient point, coordinate frame `∂x/∂θ_a` and `σ_aa` from per-axis trig values.
fn embedding(n: usize, cos: &[f64], sin: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = n + 1;
    let mut x = vec![0.0; d];
    // running product of sines of the outer polar angles
    let mut prefix = vec![1.0; n];
    for a in 1..n {
        prefix[a] = prefix[a - 1] * sin[a - 1];
    }
    for a in 0..n - 1 {
        x[n - a] = prefix[a] * cos[a];
    }
    x[0] = prefix[n - 1] * cos[n - 1];
    x[1] = prefix[n - 1] * sin[n - 1];

    let mut frame = vec![0.0; n * d];
    for a in 0..n - 1 {
        let e = &mut frame[a * d..(a + 1) * d];
        let cot = cos[a] / sin[a];
        for m in 0..n - a {
            e[m] = x[m] * cot;
        }
        e[n - a] = -prefix[a] * sin[a];
    }
    let e = &mut frame[(n - 1) * d..n * d];
    e[0] = -x[1];
    e[1] = x[0];

    let sigma = prefix.iter().map(|p| p * p).collect();
    (x, frame, sigma)
}

/// Converts a unit vector to per-axis `(cos, sin)` pairs, polar axes first and `φ` last.
pub(crate) fn direction_trig(n: usize, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cos = Vec::with_capacity(n);
    let mut sin = Vec::with_capacity(n);
    // r[m] = |(x_0, …, x_m)|
    let mut r = vec![0.0; n + 1];
    let mut acc = 0.0;
    for m in 0..=n {
        acc += x[m] * x[m];
        r[m] = acc.sqrt();
    }
    for a in 0..n - 1 {
        let outer = r[n - a];
        let inner = r[n - a - 1];
        if outer == 0.0 {
            cos.push(1.0);
            sin.push(0.0);
        } else {
            cos.push(x[n - a] / outer);
            sin.push(inner / outer);
        }
    }
    if r[1] == 0.0 {
        cos.push(1.0);
        sin.push(0.0);
    } else {
        cos.push(x[0] / r[1]);
        sin.push(x[1] / r[1]);
    }
    (cos, sin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sphere_volume() {
        let g = SphereGrid::new(2, &[16, 32]).unwrap();
        assert_eq!(g.len(), 512);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        let g = SphereGrid::new(3, &[8, 8, 16]).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 2.0 * PI * PI).abs() < 1e-12);
        let g = SphereGrid::new(4, &[4, 5, 6, 8]).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SphereGrid::new(1, &[8]),
            Err(Error::InvalidDimension(1))
        ));
        assert!(SphereGrid::new(2, &[2, 4]).is_err());
        assert!(SphereGrid::new(2, &[8, 7]).is_err());
        assert!(SphereGrid::new(2, &[8]).is_err());
        assert!(SphereGrid::new(3, &[8, 3, 8]).is_err());
    }

    #[test]
    fn nodes_are_unit_and_off_the_poles() {
        let g = SphereGrid::new(3, &[6, 7, 10]).unwrap();
        for node in 0..g.len() {
            let x = g.point(node);
            let r: f64 = x.iter().map(|v| v * v).sum();
            assert!((r - 1.0).abs() < 1e-14);
            let (_, sin) = g.polar_trig(node);
            assert!(sin.iter().all(|&s| s > 0.0));
        }
    }

    #[test]
    fn frames_are_orthogonal_with_sigma_norms() {
        let g = SphereGrid::new(3, &[5, 6, 8]).unwrap();
        for node in 0..g.len() {
            let x = g.point(node);
            let sig = g.sigma_diag(node);
            for a in 0..3 {
                let ea = g.tangent(node, a);
                let dot_x: f64 = ea.iter().zip(x).map(|(p, q)| p * q).sum();
                assert!(dot_x.abs() < 1e-14);
                for b in 0..3 {
                    let eb = g.tangent(node, b);
                    let dot: f64 = ea.iter().zip(eb).map(|(p, q)| p * q).sum();
                    let expect = if a == b { sig[a] } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn direction_trig_inverts_embedding() {
        let g = SphereGrid::new(3, &[5, 6, 8]).unwrap();
        for node in [0, 17, 100, g.len() - 1] {
            let (c, s) = direction_trig(3, g.point(node));
            let (c0, s0) = g.polar_trig(node);
            for a in 0..2 {
                assert!((c[a] - c0[a]).abs() < 1e-14 && (s[a] - s0[a]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn round_christoffel_symbols_n2() {
        let g = SphereGrid::new(2, &[6, 8]).unwrap();
        let node = 9;
        let (c, s) = g.polar_trig(node);
        let gamma = g.sigma_christoffel(node);
        // [k][i][j]: θ = 0, φ = 1
        assert!((gamma[(0 * 2 + 1) * 2 + 1] + s[0] * c[0]).abs() < 1e-15);
        assert!((gamma[(1 * 2 + 0) * 2 + 1] - c[0] / s[0]).abs() < 1e-15);
        assert!((gamma[(1 * 2 + 1) * 2 + 0] - c[0] / s[0]).abs() < 1e-15);
    }

    #[test]
    fn antipodes_are_involutions() {
        let g = SphereGrid::new(3, &[5, 6, 8]).unwrap();
        for a in 0..3 {
            for node in 0..g.len() {
                assert_eq!(g.antipodes[a][g.antipodes[a][node]], node);
            }
        }
    }
}
