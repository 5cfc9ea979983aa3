//! Row-pivoted LU for the small dense block systems of each Picard pass.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// A pivot smaller than this times the largest matrix entry is treated as zero.
pub const PIVOT_RELATIVE_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {rhs}, matrix has {rows} rows")]
    DimensionMismatch { rows: usize, rhs: usize },
    #[error("non-finite entry in linear system")]
    NonFinite,
    #[error("matrix is singular to working precision at pivot {index} (|pivot| = {pivot:e})")]
    Singular { index: usize, pivot: f64 },
}

/// Assembled coupled system `[[A_MM, A_MN], [A_NM, A_NN]] [c; d] = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl BlockSystem {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self, SolveError> {
        if !matrix.is_square() {
            return Err(SolveError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if rhs.len() != matrix.nrows() {
            return Err(SolveError::DimensionMismatch {
                rows: matrix.nrows(),
                rhs: rhs.len(),
            });
        }
        if matrix.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        Ok(Self { matrix, rhs })
    }

    /// Stacks four equally sized blocks and two right-hand sides.
    pub fn from_blocks(
        top_left: &DMatrix<f64>,
        top_right: &DMatrix<f64>,
        bottom_left: &DMatrix<f64>,
        bottom_right: &DMatrix<f64>,
        rhs_top: &DVector<f64>,
        rhs_bottom: &DVector<f64>,
    ) -> Result<Self, SolveError> {
        let n = top_left.nrows();
        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        matrix.view_mut((0, 0), (n, n)).copy_from(top_left);
        matrix.view_mut((0, n), (n, n)).copy_from(top_right);
        matrix.view_mut((n, 0), (n, n)).copy_from(bottom_left);
        matrix.view_mut((n, n), (n, n)).copy_from(bottom_right);
        let mut rhs = DVector::zeros(2 * n);
        rhs.rows_mut(0, n).copy_from(rhs_top);
        rhs.rows_mut(n, n).copy_from(rhs_bottom);
        Self::new(matrix, rhs)
    }
}

/// Packed `L` (unit lower, below the diagonal) and `U` with the row permutation.
#[derive(Debug, Clone)]
pub struct LuFactors {
    packed: DMatrix<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(matrix: &DMatrix<f64>) -> Result<Self, SolveError> {
        if !matrix.is_square() {
            return Err(SolveError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        let n = matrix.nrows();
        let max_entry = matrix.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let threshold = PIVOT_RELATIVE_TOL * max_entry;
        let mut a = matrix.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_abs) =
                (k..n)
                    .map(|r| (r, a[(r, k)].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(SolveError::Singular {
                    index: k,
                    pivot: pivot_abs,
                });
            }
            if pivot_row != k {
                a.swap_rows(k, pivot_row);
                perm.swap(k, pivot_row);
            }
            let pivot = a[(k, k)];
            for r in k + 1..n {
                let factor = a[(r, k)] / pivot;
                a[(r, k)] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        let u = a[(k, c)];
                        a[(r, c)] -= factor * u;
                    }
                }
            }
        }
        Ok(Self { packed: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Row permutation: row `i` of `P A` is row `perm[i]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| match r.cmp(&c) {
            std::cmp::Ordering::Greater => self.packed[(r, c)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| if r <= c { self.packed[(r, c)] } else { 0.0 })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>, SolveError> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(SolveError::DimensionMismatch {
                rows: n,
                rhs: rhs.len(),
            });
        }
        let mut x = DVector::from_iterator(n, self.perm.iter().map(|&p| rhs[p]));
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.packed[(r, c)] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.packed[(r, c)] * x[c];
            }
            x[r] = s / self.packed[(r, r)];
        }
        Ok(x)
    }
}

pub fn lu_solve(system: &BlockSystem) -> Result<DVector<f64>, SolveError> {
    LuFactors::factor(&system.matrix)?.solve(&system.rhs)
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Infinity-norm condition number `||A|| ||A^-1||`.
///
/// The matrices here are at most a few dozen rows, so the inverse is formed
/// column by column from the LU factors rather than estimated.
pub fn condition_estimate(matrix: &DMatrix<f64>) -> Result<f64, SolveError> {
    let lu = LuFactors::factor(matrix)?;
    let n = lu.dim();
    let mut inverse = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e.fill(0.0);
        e[j] = 1.0;
        inverse.set_column(j, &lu.solve(&e)?);
    }
    Ok(inf_norm(matrix) * inf_norm(&inverse))
}
