//! Sampled scalar and tensor fields on a [`SphereGrid`].

use super::grid::SphereGrid;
use crate::{Error, Result};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

/// One real value per grid node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidShape {
                n: grid.n(),
                shape: grid.shape().to_vec(),
                reason: format!("expected {} values, got {}", grid.len(), values.len()),
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Arc<SphereGrid>, value: f64) -> Self {
        let values = vec![value; grid.len()];
        ScalarField { grid, values }
    }

    /// Samples a function of the ambient unit vector.
    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.sample(f);
        ScalarField { grid, values }
    }

    /// The linear function `x ↦ (v, x)`.
    pub fn linear(grid: Arc<SphereGrid>, v: &[f64]) -> Self {
        Self::from_fn(grid, |x| x.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Add<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
            .expect("grid mismatch in field addition")
    }
}

impl Sub<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
            .expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

pub(crate) fn check_same(a: &Arc<SphereGrid>, b: &Arc<SphereGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Index placement of a tensor of total rank ≤ 2 in the coordinate frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valence {
    /// `T_i`
    Covector,
    /// `T^i`
    Vector,
    /// `T_{ij}`
    Covariant2,
    /// `T^{ij}`
    Contravariant2,
    /// `T^i_j`, stored row = upper index.
    Mixed,
}

impl Valence {
    pub fn rank(self) -> usize {
        match self {
            Valence::Covector | Valence::Vector => 1,
            _ => 2,
        }
    }
}

/// Coordinate components of a tensor field, node-major.
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: Arc<SphereGrid>,
    valence: Valence,
    symmetric: bool,
    data: Vec<f64>,
}

impl TensorField {
    pub fn new(
        grid: Arc<SphereGrid>,
        valence: Valence,
        symmetric: bool,
        data: Vec<f64>,
    ) -> Result<Self> {
        let per = grid.n().pow(valence.rank() as u32);
        if data.len() != per * grid.len() {
            return Err(Error::InvalidShape {
                n: grid.n(),
                shape: grid.shape().to_vec(),
                reason: format!(
                    "expected {} components, got {}",
                    per * grid.len(),
                    data.len()
                ),
            });
        }
        Ok(TensorField {
            grid,
            valence,
            symmetric,
            data,
        })
    }

    pub fn zeros(grid: Arc<SphereGrid>, valence: Valence, symmetric: bool) -> Self {
        let per = grid.n().pow(valence.rank() as u32);
        let data = vec![0.0; per * grid.len()];
        TensorField {
            grid,
            valence,
            symmetric,
            data,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn components_per_node(&self) -> usize {
        self.grid.n().pow(self.valence.rank() as u32)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Components at one node; rank-2 tensors are row-major `n × n`.
    pub fn at(&self, node: usize) -> &[f64] {
        let per = self.components_per_node();
        &self.data[node * per..(node + 1) * per]
    }

    pub(crate) fn at_mut(&mut self, node: usize) -> &mut [f64] {
        let per = self.components_per_node();
        &mut self.data[node * per..(node + 1) * per]
    }

    /// Component `(i, j)` of a rank-2 field.
    pub fn get(&self, node: usize, i: usize, j: usize) -> f64 {
        self.at(node)[i * self.grid.n() + j]
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &TensorField, c: f64) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        if self.valence != other.valence {
            return Err(Error::Numeric("valence mismatch".into()));
        }
        let mut out = self.clone();
        out.symmetric = self.symmetric && other.symmetric;
        out.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += c * b);
        Ok(out)
    }

    /// Largest `|T_ij - T_ji|` over nodes, for rank-2 fields.
    pub fn asymmetry(&self) -> f64 {
        if self.valence.rank() != 2 {
            return 0.0;
        }
        let n = self.grid.n();
        (0..self.grid.len())
            .flat_map(|node| {
                let t = self.at(node);
                (0..n).flat_map(move |i| (0..n).map(move |j| (t[i * n + j] - t[j * n + i]).abs()))
            })
            .fold(0.0, f64::max)
    }
}

/// Metric data needed to turn tensors into pointwise magnitudes and to integrate:
/// `g_ij`, `g^ij` and the density `dV_g / dV_σ`.
#[derive(Debug, Clone)]
pub struct Metric {
    pub g: TensorField,
    pub g_inv: TensorField,
    pub density: ScalarField,
}

impl Metric {
    /// The round metric `σ`.
    pub fn round(grid: &Arc<SphereGrid>) -> Self {
        let n = grid.n();
        let mut g = TensorField::zeros(grid.clone(), Valence::Covariant2, true);
        let mut g_inv = TensorField::zeros(grid.clone(), Valence::Contravariant2, true);
        for node in 0..grid.len() {
            let sig = grid.sigma_diag(node).to_vec();
            let gn = g.at_mut(node);
            for a in 0..n {
                gn[a * n + a] = sig[a];
            }
            let gi = g_inv.at_mut(node);
            for a in 0..n {
                gi[a * n + a] = 1.0 / sig[a];
            }
        }
        Metric {
            g,
            g_inv,
            density: ScalarField::constant(grid.clone(), 1.0),
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.g.grid()
    }
}

/// Three-index array `Γ^k_{ij}` per node, stored `[k][i][j]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    grid: Arc<SphereGrid>,
    data: Vec<f64>,
}

impl Christoffel {
    pub(crate) fn from_data(grid: Arc<SphereGrid>, data: Vec<f64>) -> Self {
        Christoffel { grid, data }
    }

    /// Christoffel symbols of the round metric.
    pub fn round(grid: &Arc<SphereGrid>) -> Self {
        let data = (0..grid.len())
            .flat_map(|node| grid.sigma_christoffel(node))
            .collect();
        Christoffel {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let n3 = self.grid.n().pow(3);
        &self.data[node * n3..(node + 1) * n3]
    }

    pub fn get(&self, node: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.grid.n();
        self.at(node)[(k * n + i) * n + j]
    }

    /// Largest `|Γ^k_ij - Γ^k_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for node in 0..self.grid.len() {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        worst =
                            worst.max((self.get(node, k, i, j) - self.get(node, k, j, i)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Round metric, inverse and Christoffel symbols as fields.
pub fn sigma_metric(grid: &Arc<SphereGrid>) -> (TensorField, TensorField, Christoffel) {
    let m = Metric::round(grid);
    (m.g, m.g_inv, Christoffel::round(grid))
}
