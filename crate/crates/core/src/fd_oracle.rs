//! Finite-difference reference solver.
//!
//! Nodal second-order central differences in space and backward Euler in
//! time, with the same lag-one-factor Picard linearization as the Galerkin
//! path. Nothing here touches the basis, quadrature or dense LU modules; the
//! two solvers share only the problem description.

use thiserror::Error;

use crate::problem::ProblemSpec;
use crate::stepper::{whole_steps, Solver, SolverConfig, SolverError};

pub const FD_PICARD_TOL: f64 = 1e-10;
pub const FD_PICARD_MAX: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdError {
    #[error("finite-difference grid needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid time increment {0}")]
    InvalidStep(f64),
    #[error("t_end = {t_end} is not a whole multiple of dt = {dt}")]
    StepCountMismatch { t_end: f64, dt: f64 },
    #[error("finite-difference Picard iteration did not converge at t = {t} (last change {last_change:e})")]
    PicardNotConverged { t: f64, last_change: f64 },
    #[error("singular 2x2 block at node {node}")]
    SingularBlock { node: usize },
    #[error(transparent)]
    Galerkin(#[from] SolverError),
    #[error("comparison grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
}

/// Nodal values of both species on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub nx: usize,
    pub lower: f64,
    pub dx: f64,
    pub m_values: Vec<f64>,
    pub n_values: Vec<f64>,
    pub t: f64,
}

impl FdGrid {
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.lower + self.dx * (self.nx - 1) as f64
        } else {
            self.lower + self.dx * i as f64
        }
    }

    /// Piecewise-linear interpolation of `(M, N)`; `x` is clamped to the grid.
    pub fn interpolate(&self, x: f64) -> (f64, f64) {
        let s = ((x - self.lower) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let i = (s.floor() as usize).min(self.nx - 2);
        let w = s - i as f64;
        let lerp = |v: &[f64]| (1.0 - w) * v[i] + w * v[i + 1];
        (lerp(&self.m_values), lerp(&self.n_values))
    }
}

/// Space and time resolution of one oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdParams {
    pub nx: usize,
    pub dt: f64,
}

type Block = [[f64; 2]; 2];

fn block_inverse(a: &Block) -> Option<Block> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

fn block_mul_vec(a: &Block, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

/// Solves a block-tridiagonal system whose off-diagonal blocks are the
/// diagonal matrices `lower_off[i]` / `upper_off[i]`.
fn block_thomas(diag: &[Block], off: [f64; 2], rhs: &[[f64; 2]]) -> Result<Vec<[f64; 2]>, usize> {
    let n = diag.len();
    let mut c_prime: Vec<Block> = Vec::with_capacity(n);
    let mut d_prime: Vec<[f64; 2]> = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = diag[i];
        let mut r = rhs[i];
        if i > 0 {
            // a -= L * c'[i-1], r -= L * d'[i-1], with L = diag(off)
            let cp = c_prime[i - 1];
            let dp = d_prime[i - 1];
            for row in 0..2 {
                for col in 0..2 {
                    a[row][col] -= off[row] * cp[row][col];
                }
                r[row] -= off[row] * dp[row];
            }
        }
        let inv = block_inverse(&a).ok_or(i)?;
        // c' = inv * U with U = diag(off)
        c_prime.push([
            [inv[0][0] * off[0], inv[0][1] * off[1]],
            [inv[1][0] * off[0], inv[1][1] * off[1]],
        ]);
        d_prime.push(block_mul_vec(&inv, r));
    }
    let mut x = vec![[0.0; 2]; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        let next = block_mul_vec(&c_prime[i], x[i + 1]);
        x[i] = [d_prime[i][0] - next[0], d_prime[i][1] - next[1]];
    }
    Ok(x)
}

/// Lag-one-factor split of `M^a N^b` at nodal values: returns
/// `(gamma, omega, pi, phi)` with `f = gamma + omega (N - gamma0) = pi + phi (M - theta0)`.
fn nodal_split(problem: &ProblemSpec, m: f64, n: f64) -> (f64, f64, f64, f64) {
    let a = problem.reaction.exponent_m as i32;
    let b = problem.reaction.exponent_n as i32;
    let full = m.powi(a) * n.powi(b);
    let (gamma, omega) = if b == 0 {
        (full, 0.0)
    } else {
        let w = m.powi(a) * n.powi(b - 1);
        (w * problem.gamma0, w)
    };
    let (pi, phi) = if a == 0 {
        (full, 0.0)
    } else {
        let w = m.powi(a - 1) * n.powi(b);
        (w * problem.theta0, w)
    };
    (gamma, omega, pi, phi)
}

/// Initial data sampled at the nodes, with boundary nodes pinned.
pub fn fd_initial(problem: &ProblemSpec, nx: usize) -> Result<FdGrid, FdError> {
    if nx < 3 {
        return Err(FdError::TooFewPoints(nx));
    }
    let dx = (problem.upper - problem.lower) / (nx - 1) as f64;
    let mut grid = FdGrid {
        nx,
        lower: problem.lower,
        dx,
        m_values: Vec::with_capacity(nx),
        n_values: Vec::with_capacity(nx),
        t: 0.0,
    };
    for i in 0..nx {
        let x = grid.node(i);
        grid.m_values.push(problem.initial_m.eval(x));
        grid.n_values.push(problem.initial_n.eval(x));
    }
    pin_boundaries(problem, &mut grid);
    Ok(grid)
}

fn pin_boundaries(problem: &ProblemSpec, grid: &mut FdGrid) {
    let last = grid.nx - 1;
    grid.m_values[0] = problem.theta0;
    grid.m_values[last] = problem.theta0;
    grid.n_values[0] = problem.gamma0;
    grid.n_values[last] = problem.gamma0;
}

/// One backward-Euler step with inner Picard iteration.
pub fn fd_step(problem: &ProblemSpec, grid: &FdGrid, dt: f64) -> Result<FdGrid, FdError> {
    let nx = grid.nx;
    let interior = nx - 2;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let (e1, e2) = (problem.eps1 * inv_dx2, problem.eps2 * inv_dx2);
    let off = [-e1, -e2];
    let t_new = grid.t + dt;

    let mut m_iter = grid.m_values.clone();
    let mut n_iter = grid.n_values.clone();
    let mut change = f64::INFINITY;
    let mut diag = vec![[[0.0; 2]; 2]; interior];
    let mut rhs = vec![[0.0; 2]; interior];
    for _ in 0..FD_PICARD_MAX {
        for k in 0..interior {
            let i = k + 1;
            let (gamma, omega, pi, phi) = nodal_split(problem, m_iter[i], n_iter[i]);
            diag[k] = [
                [
                    1.0 / dt + 2.0 * e1 + problem.decay_m,
                    -problem.sign_m * omega,
                ],
                [-problem.sign_n * phi, 1.0 / dt + 2.0 * e2 + problem.decay_n],
            ];
            rhs[k] = [
                grid.m_values[i] / dt
                    + problem.sign_m * (gamma - omega * problem.gamma0)
                    + problem.source_m,
                grid.n_values[i] / dt
                    + problem.sign_n * (pi - phi * problem.theta0)
                    + problem.source_n,
            ];
        }
        // Dirichlet neighbours move to the right-hand side
        rhs[0][0] += e1 * problem.theta0;
        rhs[0][1] += e2 * problem.gamma0;
        rhs[interior - 1][0] += e1 * problem.theta0;
        rhs[interior - 1][1] += e2 * problem.gamma0;

        let sol =
            block_thomas(&diag, off, &rhs).map_err(|k| FdError::SingularBlock { node: k + 1 })?;
        change = 0.0;
        for (k, v) in sol.iter().enumerate() {
            let i = k + 1;
            change = change
                .max((v[0] - m_iter[i]).abs())
                .max((v[1] - n_iter[i]).abs());
            m_iter[i] = v[0];
            n_iter[i] = v[1];
        }
        if change < FD_PICARD_TOL {
            let mut next = FdGrid {
                nx,
                lower: grid.lower,
                dx: grid.dx,
                m_values: m_iter,
                n_values: n_iter,
                t: t_new,
            };
            pin_boundaries(problem, &mut next);
            return Ok(next);
        }
        if !change.is_finite() {
            break;
        }
    }
    Err(FdError::PicardNotConverged {
        t: t_new,
        last_change: change,
    })
}

/// Oracle solution at `t_end`.
pub fn fd_solve(problem: &ProblemSpec, nx: usize, dt: f64, t_end: f64) -> Result<FdGrid, FdError> {
    fd_solve_with(problem, nx, dt, t_end, |_| {})
}

/// As [`fd_solve`], passing every time level (including `t = 0`) to `visit`.
pub fn fd_solve_with<F: FnMut(&FdGrid)>(
    problem: &ProblemSpec,
    nx: usize,
    dt: f64,
    t_end: f64,
    mut visit: F,
) -> Result<FdGrid, FdError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FdError::InvalidStep(dt));
    }
    let steps = whole_steps(t_end, dt).ok_or(FdError::StepCountMismatch { t_end, dt })?;
    let mut grid = fd_initial(problem, nx)?;
    visit(&grid);
    for k in 1..=steps {
        grid = fd_step(problem, &grid, dt)?;
        grid.t = k as f64 * dt;
        visit(&grid);
    }
    Ok(grid)
}

/// Distances between two solutions of the same problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyReport {
    pub t: f64,
    pub grid_points: usize,
    pub l2_m: f64,
    pub linf_m: f64,
    pub l2_n: f64,
    pub linf_n: f64,
}

fn norms_of(diffs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (sq, max) = diffs.fold((0.0, 0.0f64), |(s, m), e| (s + e * e, m.max(e.abs())));
    (sq.sqrt(), max)
}

/// Differences of two sampled field pairs over the same comparison points.
pub fn discrepancy<A, B>(
    lower: f64,
    upper: f64,
    t: f64,
    grid_points: usize,
    a: A,
    b: B,
) -> Result<DiscrepancyReport, FdError>
where
    A: Fn(f64) -> Result<(f64, f64), FdError>,
    B: Fn(f64) -> Result<(f64, f64), FdError>,
{
    if grid_points < 2 {
        return Err(FdError::GridTooSmall(grid_points));
    }
    let h = (upper - lower) / (grid_points - 1) as f64;
    let mut dm = Vec::with_capacity(grid_points);
    let mut dn = Vec::with_capacity(grid_points);
    for k in 0..grid_points {
        let x = if k + 1 == grid_points {
            upper
        } else {
            lower + h * k as f64
        };
        let (m1, n1) = a(x)?;
        let (m2, n2) = b(x)?;
        dm.push(m1 - m2);
        dn.push(n1 - n2);
    }
    let (l2_m, linf_m) = norms_of(dm.into_iter());
    let (l2_n, linf_n) = norms_of(dn.into_iter());
    Ok(DiscrepancyReport {
        t,
        grid_points,
        l2_m,
        linf_m,
        l2_n,
        linf_n,
    })
}

/// Galerkin solution (per `config`) against the oracle at time `t`.
pub fn compare(
    problem: &ProblemSpec,
    config: &SolverConfig,
    fd: FdParams,
    t: f64,
    grid_points: usize,
) -> Result<DiscrepancyReport, FdError> {
    let cfg = SolverConfig {
        t_end: t,
        ..config.clone()
    };
    let solver = Solver::new(problem, &cfg)?;
    let galerkin = solver.run_with(|_| {})?;
    let oracle = fd_solve(problem, fd.nx, fd.dt, t)?;
    let basis = solver.basis();
    discrepancy(
        problem.lower,
        problem.upper,
        t,
        grid_points,
        |x| {
            let mut m = problem.theta0;
            let mut n = problem.gamma0;
            for j in 0..basis.len() {
                let b = basis.eval(j, x).map_err(SolverError::from)?;
                m += galerkin.c[j] * b;
                n += galerkin.d[j] * b;
            }
            Ok((m, n))
        },
        |x| Ok(oracle.interpolate(x)),
    )
}
