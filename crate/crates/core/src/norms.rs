//! Field evaluation, tabulation and time-step self-convergence norms.

use thiserror::Error;

use crate::basis::{BasisError, BasisSpec};
use crate::problem::ProblemSpec;
use crate::stepper::{whole_steps, CoefficientState, Solver, SolverConfig, SolverError};

/// Default size of the uniform comparison grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("time level t = {0} is not on the trajectory")]
    MissingTime(f64),
    #[error("a comparison grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("t_report = {t} is not a whole multiple of dt = {dt}")]
    ReportTimeMismatch { t: f64, dt: f64 },
}

/// One evaluated point of both species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub t: f64,
    pub m: f64,
    pub n: f64,
}

/// Discrete distances between two solutions on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub dt: f64,
    pub l2_m: f64,
    pub linf_m: f64,
    pub l2_n: f64,
    pub linf_n: f64,
    pub grid_points: usize,
    pub t: f64,
}

impl NormReport {
    /// `L2 <= sqrt(n) * Linf` for both species.
    pub fn satisfies_norm_relation(&self) -> bool {
        let bound = (self.grid_points as f64).sqrt() * (1.0 + 1e-12);
        self.l2_m <= bound * self.linf_m && self.l2_n <= bound * self.linf_n
    }
}

/// `(M, N)` at `x` from the trial solution.
pub fn evaluate(
    state: &CoefficientState,
    problem: &ProblemSpec,
    basis: &BasisSpec,
    x: f64,
) -> Result<(f64, f64), BasisError> {
    let mut m = problem.theta0;
    let mut n = problem.gamma0;
    for j in 0..basis.len() {
        let b = basis.eval(j, x)?;
        m += state.c[j] * b;
        n += state.d[j] * b;
    }
    Ok((m, n))
}

/// `count` equally spaced points from `lower` to `upper` inclusive.
pub fn uniform_grid(lower: f64, upper: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lower],
        _ => {
            let h = (upper - lower) / (count - 1) as f64;
            (0..count)
                .map(|k| {
                    if k == count - 1 {
                        upper
                    } else {
                        lower + k as f64 * h
                    }
                })
                .collect()
        }
    }
}

/// Root-sum-square and max-abs of `a - b`.
pub fn discrete_norms(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (sq, max) = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold((0.0, 0.0f64), |(s, m), e| (s + e * e, m.max(e)));
    (sq.sqrt(), max)
}

fn sample_grid(
    state: &CoefficientState,
    problem: &ProblemSpec,
    basis: &BasisSpec,
    xs: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), BasisError> {
    let mut ms = Vec::with_capacity(xs.len());
    let mut ns = Vec::with_capacity(xs.len());
    for &x in xs {
        let (m, n) = evaluate(state, problem, basis, x)?;
        ms.push(m);
        ns.push(n);
    }
    Ok((ms, ns))
}

/// Norms between two already-computed states on a uniform grid.
pub fn compare_states(
    coarse: &CoefficientState,
    fine: &CoefficientState,
    problem: &ProblemSpec,
    basis: &BasisSpec,
    dt: f64,
    grid_points: usize,
) -> Result<NormReport, EvalError> {
    if grid_points < 2 {
        return Err(EvalError::GridTooSmall(grid_points));
    }
    let xs = uniform_grid(problem.lower, problem.upper, grid_points);
    let (m1, n1) = sample_grid(coarse, problem, basis, &xs)?;
    let (m2, n2) = sample_grid(fine, problem, basis, &xs)?;
    let (l2_m, linf_m) = discrete_norms(&m1, &m2);
    let (l2_n, linf_n) = discrete_norms(&n1, &n2);
    Ok(NormReport {
        dt,
        l2_m,
        linf_m,
        l2_n,
        linf_n,
        grid_points,
        t: coarse.t,
    })
}

/// Final state at `t_report` for the given time increment.
pub fn state_at(
    problem: &ProblemSpec,
    config: &SolverConfig,
    dt: f64,
    t_report: f64,
) -> Result<CoefficientState, EvalError> {
    if whole_steps(t_report, dt).is_none() {
        return Err(EvalError::ReportTimeMismatch { t: t_report, dt });
    }
    let cfg = SolverConfig {
        dt,
        t_end: t_report,
        ..config.clone()
    };
    Ok(Solver::new(problem, &cfg)?.run_with(|_| {})?)
}

/// `||M_dt - M_{dt/2}||` and likewise for N at `t_report`, with `dt = config.dt`.
///
/// The two trajectories run on separate threads.
pub fn self_convergence(
    problem: &ProblemSpec,
    config: &SolverConfig,
    t_report: f64,
    grid_points: usize,
) -> Result<NormReport, EvalError> {
    if grid_points < 2 {
        return Err(EvalError::GridTooSmall(grid_points));
    }
    let dt = config.dt;
    let (coarse, fine) = std::thread::scope(|s| {
        let coarse = s.spawn(|| state_at(problem, config, dt, t_report));
        let fine = state_at(problem, config, 0.5 * dt, t_report);
        (
            coarse.join().expect("coarse trajectory thread panicked"),
            fine,
        )
    });
    let basis = BasisSpec::new(problem.lower, problem.upper, config.degree)?;
    compare_states(&coarse?, &fine?, problem, &basis, dt, grid_points)
}

/// One row per entry of `dts`; the first (coarsest) row is left empty and every
/// later row holds [`self_convergence`] for that increment.
pub fn convergence_table(
    problem: &ProblemSpec,
    config: &SolverConfig,
    dts: &[f64],
    t_report: f64,
    grid_points: usize,
) -> Result<Vec<(f64, Option<NormReport>)>, EvalError> {
    let rows: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = dts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(_, &dt)| {
                s.spawn(move || {
                    let cfg = SolverConfig {
                        dt,
                        ..config.clone()
                    };
                    self_convergence(problem, &cfg, t_report, grid_points)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence thread panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(dts.len());
    if let Some(&first) = dts.first() {
        out.push((first, None));
    }
    for (&dt, row) in dts.iter().skip(1).zip(rows) {
        out.push((dt, Some(row?)));
    }
    Ok(out)
}

/// Samples at every `(t, x)` pair, time-major.
pub fn table_emit(
    trajectory: &[CoefficientState],
    problem: &ProblemSpec,
    basis: &BasisSpec,
    xs: &[f64],
    ts: &[f64],
) -> Result<Vec<FieldSample>, EvalError> {
    let mut out = Vec::with_capacity(xs.len() * ts.len());
    for &t in ts {
        let state = find_time(trajectory, t).ok_or(EvalError::MissingTime(t))?;
        for &x in xs {
            let (m, n) = evaluate(state, problem, basis, x)?;
            out.push(FieldSample {
                x,
                t: state.t,
                m,
                n,
            });
        }
    }
    Ok(out)
}

/// The state whose time matches `t` to within rounding.
pub fn find_time(trajectory: &[CoefficientState], t: f64) -> Option<&CoefficientState> {
    trajectory
        .iter()
        .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::run;

    #[test]
    fn endpoints_return_boundary_constants() {
        for p in [ProblemSpec::builtin_tp1(), ProblemSpec::builtin_grayscott()] {
            let cfg = SolverConfig {
                t_end: 0.5,
                ..SolverConfig::default()
            };
            let traj = run(&p, &cfg).unwrap();
            let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
            for s in &traj {
                assert_eq!(evaluate(s, &p, &b, p.lower).unwrap(), (p.theta0, p.gamma0));
                assert_eq!(evaluate(s, &p, &b, p.upper).unwrap(), (p.theta0, p.gamma0));
            }
            assert!(evaluate(&traj[0], &p, &b, p.upper + 1.0).is_err());
        }
    }

    #[test]
    fn same_increment_gives_zero_norms() {
        let p = ProblemSpec::builtin_tp1();
        let cfg = SolverConfig {
            t_end: 1.0,
            ..SolverConfig::default()
        };
        let s = state_at(&p, &cfg, 0.1, 1.0).unwrap();
        let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
        let r = compare_states(&s, &s, &p, &b, 0.1, 101).unwrap();
        assert_eq!((r.l2_m, r.linf_m, r.l2_n, r.linf_n), (0.0, 0.0, 0.0, 0.0));
        assert!(r.satisfies_norm_relation());
    }

    #[test]
    fn grid_and_norm_helpers() {
        let g = uniform_grid(0.0, 2.0, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 2.0);
        assert!((g[10] - 1.0).abs() < 1e-15);
        let (l2, linf) = discrete_norms(&[1.0, 2.0, 3.0], &[1.0, 0.0, 4.0]);
        assert!((l2 - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(linf, 2.0);
    }

    #[test]
    fn table_layout_and_missing_time() {
        let p = ProblemSpec::builtin_tp1();
        let cfg = SolverConfig {
            t_end: 2.0,
            ..SolverConfig::default()
        };
        let traj = run(&p, &cfg).unwrap();
        let b = BasisSpec::new(p.lower, p.upper, 6).unwrap();
        let xs: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let rows = table_emit(&traj, &p, &b, &xs, &[1.0, 2.0]).unwrap();
        assert_eq!(rows.len(), 42);
        assert_eq!(rows[21].t, 2.0);
        let rows = table_emit(&traj, &p, &b, &[0.0, 2.0], &[0.0]).unwrap();
        assert!(rows.iter().all(|r| r.m == 0.0 && r.n == 1.0));
        assert_eq!(
            table_emit(&traj, &p, &b, &xs, &[2.05]),
            Err(EvalError::MissingTime(2.05))
        );
    }

    #[test]
    fn report_time_must_align() {
        let p = ProblemSpec::builtin_tp1();
        let cfg = SolverConfig {
            dt: 0.3,
            ..SolverConfig::default()
        };
        assert!(matches!(
            self_convergence(&p, &cfg, 1.0, 101),
            Err(EvalError::ReportTimeMismatch { .. })
        ));
        assert!(matches!(
            self_convergence(&p, &cfg, 0.6, 1),
            Err(EvalError::GridTooSmall(1))
        ));
    }
}
