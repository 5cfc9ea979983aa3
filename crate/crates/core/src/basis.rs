//! Modified Bernstein polynomials on an arbitrary interval.
//!
//! Member `n` of the degree-`m` family on `[L, U]` is
//!
//! ```text
//! B(n, m)(x) = C(m, n) (x - L)^n (U - x)^(m - n) (x - L)(U - x) / (U - L)^m
//! ```
//!
//! The trailing `(x - L)(U - x)` factor is deliberately left un-normalized, so
//! on wide domains the members grow like `(U - L)^2 / 4` (2500 on `[-50, 50]`)
//! and the Galerkin coefficients shrink by the same scale.

use thiserror::Error;

/// Largest degree with an exactly representable precomputed binomial row.
pub const MAX_DEGREE: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error(
        "invalid interval [{lower}, {upper}]: upper must exceed lower and both must be finite"
    )]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("basis index {index} out of range for degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },
    #[error("x = {x} lies outside the basis interval [{lower}, {upper}]")]
    OutOfDomain { x: f64, lower: f64, upper: f64 },
}

/// Interval and degree that define one modified Bernstein family.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    lower: f64,
    upper: f64,
    degree: usize,
    binomials: Vec<f64>,
}

impl BasisSpec {
    pub fn new(lower: f64, upper: f64, degree: usize) -> Result<Self, BasisError> {
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(BasisError::InvalidInterval { lower, upper });
        }
        if degree > MAX_DEGREE {
            return Err(BasisError::DegreeTooLarge(degree));
        }
        Ok(Self {
            lower,
            upper,
            degree,
            binomials: binomial_row(degree),
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of members, `degree + 1`.
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    fn check(&self, n: usize, x: f64) -> Result<(), BasisError> {
        if n > self.degree {
            return Err(BasisError::IndexOutOfRange {
                index: n,
                degree: self.degree,
            });
        }
        if !self.contains(x) {
            return Err(BasisError::OutOfDomain {
                x,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }

    /// Value of member `n` at `x`.
    pub fn eval(&self, n: usize, x: f64) -> Result<f64, BasisError> {
        self.check(n, x)?;
        Ok(self.eval_unchecked(n, x))
    }

    /// Analytic first derivative of member `n` at `x`.
    pub fn eval_deriv(&self, n: usize, x: f64) -> Result<f64, BasisError> {
        self.check(n, x)?;
        Ok(self.eval_deriv_unchecked(n, x))
    }

    /// Values of every member at `x`, written into `out` (length `len()`).
    pub fn eval_all(&self, x: f64, out: &mut [f64]) -> Result<(), BasisError> {
        self.check(0, x)?;
        for (n, slot) in out.iter_mut().enumerate().take(self.len()) {
            *slot = self.eval_unchecked(n, x);
        }
        Ok(())
    }

    /// Derivatives of every member at `x`, written into `out`.
    pub fn eval_deriv_all(&self, x: f64, out: &mut [f64]) -> Result<(), BasisError> {
        self.check(0, x)?;
        for (n, slot) in out.iter_mut().enumerate().take(self.len()) {
            *slot = self.eval_deriv_unchecked(n, x);
        }
        Ok(())
    }

    fn eval_unchecked(&self, n: usize, x: f64) -> f64 {
        let m = self.degree;
        let a = x - self.lower;
        let b = self.upper - x;
        let scale = self.binomials[n] / self.width().powi(m as i32);
        scale * a.powi(n as i32 + 1) * b.powi((m - n) as i32 + 1)
    }

    // d/dx [a^(n+1) b^(m-n+1)] with a = x - L, b = U - x.
    fn eval_deriv_unchecked(&self, n: usize, x: f64) -> f64 {
        let m = self.degree;
        let a = x - self.lower;
        let b = self.upper - x;
        let p = (n + 1) as i32;
        let q = (m - n + 1) as i32;
        let scale = self.binomials[n] / self.width().powi(m as i32);
        scale * (p as f64 * a.powi(p - 1) * b.powi(q) - q as f64 * a.powi(p) * b.powi(q - 1))
    }
}

fn binomial_row(m: usize) -> Vec<f64> {
    let mut row = vec![1u64; m + 1];
    for k in 1..m {
        row[k] = row[k - 1] * (m - k + 1) as u64 / k as u64;
    }
    row.into_iter().map(|c| c as f64).collect()
}
