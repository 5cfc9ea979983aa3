//! Gauss-Legendre rules mapped onto a finite interval.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("a Gauss-Legendre rule needs at least one point")]
    NoPoints,
    #[error("invalid interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("Newton iteration for Legendre root {index} of {points} did not converge")]
    RootNotConverged { index: usize, points: usize },
}

/// Nodes and positive weights of an n-point Gauss-Legendre rule on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    lower: f64,
    upper: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `(node, weight)` pairs in increasing node order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weighted sum `sum_i w_i f(x_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Newton iteration on the Legendre recurrence, then an affine map to `[lower, upper]`.
pub fn gauss_legendre(
    points: usize,
    lower: f64,
    upper: f64,
) -> Result<QuadratureRule, QuadratureError> {
    if points == 0 {
        return Err(QuadratureError::NoPoints);
    }
    if !(lower.is_finite() && upper.is_finite() && upper > lower) {
        return Err(QuadratureError::InvalidInterval { lower, upper });
    }
    let n = points;
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    // roots come in +/- pairs; compute the non-negative half
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(QuadratureError::RootNotConverged {
                index: i,
                points: n,
            });
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x runs from the largest root downwards
        ref_nodes[n - 1 - i] = x;
        ref_nodes[i] = -x;
        ref_weights[n - 1 - i] = w;
        ref_weights[i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }
    let half = 0.5 * (upper - lower);
    let mid = 0.5 * (upper + lower);
    Ok(QuadratureRule {
        lower,
        upper,
        nodes: ref_nodes.iter().map(|&t| mid + half * t).collect(),
        weights: ref_weights.iter().map(|&w| half * w).collect(),
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let (p, prev) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - prev) / (x * x - 1.0);
    (p, d)
}

/// Smallest point count that integrates a polynomial of `degree` exactly.
pub fn points_for_degree(degree: usize) -> usize {
    degree.div_ceil(2).max(1)
}

/// Assembly rule size for basis degree `m`: exact for the quartic-in-basis
/// integrands produced by cubic reaction terms, plus four points of slack.
///
/// Gives 24 at `m = 6`.
pub fn default_point_count(degree: usize) -> usize {
    let max_integrand = 4 * (degree + 2) + 4;
    max_integrand.div_ceil(2) + 2 + 4
}

/// Rule size for projecting non-polynomial initial data (three times the default).
pub fn boosted_point_count(degree: usize) -> usize {
    3 * default_point_count(degree)
}
