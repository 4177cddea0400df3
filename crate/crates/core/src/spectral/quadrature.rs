//! One-dimensional building blocks: Gauss rules in `cos θ`, barycentric
//! interpolation and collocation differentiation matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// `∫_0^π sin^e θ dθ`.
pub fn sine_power_integral(e: usize) -> f64 {
    match e {
        0 => PI,
        1 => 2.0,
        _ => (e - 1) as f64 / e as f64 * sine_power_integral(e - 2),
    }
}

/// Gauss rule on `[-1, 1]` for the weight `(1 - x²)^{(e-1)/2}`, which is the
/// measure `sin^e θ dθ` after the substitution `x = cos θ`.
///
/// `e = 1` is Gauss–Legendre, `e = 2` Gauss–Chebyshev of the second kind.
/// Nodes are returned in increasing order and are exactly antisymmetric.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn sine_power(len: usize, e: usize) -> Self {
        assert!(len >= 1 && e >= 1);
        let lambda = e as f64 / 2.0;
        let beta: Vec<f64> = (1..len)
            .map(|k| {
                let k = k as f64;
                k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))
            })
            .collect();
        let mu0 = sine_power_integral(e);

        // Golub–Welsch for the initial nodes.
        let mut jacobi = DMatrix::<f64>::zeros(len, len);
        for (k, b) in beta.iter().enumerate() {
            let s = b.sqrt();
            jacobi[(k, k + 1)] = s;
            jacobi[(k + 1, k)] = s;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // Newton polish on the orthonormal recurrence, then Christoffel weights.
        let mut weights = vec![0.0; len];
        for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
            for _ in 0..4 {
                let (p, dp, _) = orthonormal_eval(*x, &beta, mu0);
                if dp != 0.0 {
                    *x -= p / dp;
                }
            }
            let (_, _, sumsq) = orthonormal_eval(*x, &beta, mu0);
            *w = 1.0 / sumsq;
        }

        // Enforce the reflection symmetry exactly.
        for i in 0..len / 2 {
            let j = len - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if len % 2 == 1 {
            nodes[len / 2] = 0.0;
        }
        // Rescale so the weights integrate 1 exactly to roundoff.
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w *= mu0 / total;
        }
        GaussRule { nodes, weights }
    }
}

/// Returns `(p_N(x), p_N'(x), Σ_{k<N} p_k(x)²)` for the orthonormal family
/// defined by the recurrence coefficients `beta`.
fn orthonormal_eval(x: f64, beta: &[f64], mu0: f64) -> (f64, f64, f64) {
    let len = beta.len() + 1;
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp = 0.0;
    let mut sumsq = p * p;
    let mut b_prev = 0.0f64;
    for k in 0..len {
        // sqrt(b_{k+1}) p_{k+1} = x p_k - sqrt(b_k) p_{k-1}; the final step uses b_N := 1
        // since only the zeros of p_N matter.
        let b_next = if k < beta.len() { beta[k].sqrt() } else { 1.0 };
        let p_next = (x * p - b_prev * p_prev) / b_next;
        let dp_next = (p + x * dp - b_prev * dp_prev) / b_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        b_prev = b_next;
        if k + 1 < len {
            sumsq += p * p;
        }
    }
    (p, dp, sumsq)
}

/// Barycentric weights `1 / Π_{k≠j} (x_j - x_k)`, scaled to unit max modulus.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let logs: Vec<(f64, f64)> = nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut sign = 1.0;
            let mut log = 0.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    let d = xj - xk;
                    if d < 0.0 {
                        sign = -sign;
                    }
                    log -= d.abs().ln();
                }
            }
            (sign, log)
        })
        .collect();
    let max = logs.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    logs.iter().map(|&(s, l)| s * (l - max).exp()).collect()
}

/// First and second derivative matrices of the polynomial interpolant on `nodes`.
pub fn polynomial_diff_matrices(nodes: &[f64], bary: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let len = nodes.len();
    let mut d1 = DMatrix::zeros(len, len);
    let mut d2 = DMatrix::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            if i != j {
                d1[(i, j)] = bary[j] / bary[i] / (nodes[i] - nodes[j]);
            }
        }
        let row_sum: f64 = (0..len).filter(|&j| j != i).map(|j| d1[(i, j)]).sum();
        d1[(i, i)] = -row_sum;
    }
    for i in 0..len {
        for j in 0..len {
            if i != j {
                d2[(i, j)] = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / (nodes[i] - nodes[j]));
            }
        }
        let row_sum: f64 = (0..len).filter(|&j| j != i).map(|j| d2[(i, j)]).sum();
        d2[(i, i)] = -row_sum;
    }
    (d1, d2)
}

/// Coefficients `b_j` with `p(x) = Σ b_j p(x_j)` for the polynomial interpolant.
pub fn barycentric_coefficients(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let mut out = vec![0.0; nodes.len()];
        out[j] = 1.0;
        return out;
    }
    let mut out: Vec<f64> = nodes
        .iter()
        .zip(bary)
        .map(|(&xj, &wj)| wj / (x - xj))
        .collect();
    let total: f64 = out.iter().sum();
    for b in out.iter_mut() {
        *b /= total;
    }
    out
}

/// Periodic (Fourier) differentiation matrices on `len` equispaced nodes, `len` even.
pub fn fourier_diff_matrices(len: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    assert!(len % 2 == 0);
    let h = 2.0 * PI / len as f64;
    let mut d1 = DMatrix::zeros(len, len);
    let mut d2 = DMatrix::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            if i == j {
                continue;
            }
            let k = i as isize - j as isize;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let half = k as f64 * h / 2.0;
            d1[(i, j)] = 0.5 * sign / half.tan();
            d2[(i, j)] = -0.5 * sign / half.sin().powi(2);
        }
        let r1: f64 = (0..len).filter(|&j| j != i).map(|j| d1[(i, j)]).sum();
        let r2: f64 = (0..len).filter(|&j| j != i).map(|j| d2[(i, j)]).sum();
        d1[(i, i)] = -r1;
        d2[(i, i)] = -r2;
    }
    (d1, d2)
}

/// Coefficients of the trigonometric interpolant on `len` equispaced nodes at angle `phi`.
pub fn fourier_coefficients(len: usize, phi: f64) -> Vec<f64> {
    let h = 2.0 * PI / len as f64;
    let n = len as f64;
    (0..len)
        .map(|j| {
            let mut x = (phi - j as f64 * h).rem_euclid(2.0 * PI);
            if x > PI {
                x -= 2.0 * PI;
            }
            if x.abs() < 1e-14 {
                1.0
            } else {
                (n * x / 2.0).sin() / (n * (x / 2.0).tan())
            }
        })
        .collect()
}
