//! Time marching of the coupled coefficient system.
//!
//! Each step solves
//!
//! ```text
//! [ C/dt + th K1    th K2(k)     ] [c]   [ C/dt c_old + th F1(k) + (1 - th) R_M(old) ]
//! [ th K3(k)        C/dt + th K4 ] [d] = [ C/dt d_old + th F2(k) + (1 - th) R_N(old) ]
//! ```
//!
//! where `(k)` marks blocks re-assembled at the latest Picard iterate and
//! `R(old)` is the full semi-discrete right-hand side at the previous step.
//! With `th = 1` this is the plain backward-difference recurrence.

use log::{debug, info, warn};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::assembly::{project_initial, Assembler, AssemblyError};
use crate::basis::{BasisError, BasisSpec};
use crate::dense_solve::{condition_estimate, BlockSystem, LuFactors, SolveError};
use crate::problem::{ProblemError, ProblemSpec};
use crate::quadrature::{
    boosted_point_count, default_point_count, gauss_legendre, QuadratureError,
};

pub const DEFAULT_PICARD_TOL: f64 = 1e-10;
pub const DEFAULT_PICARD_MAX: usize = 50;
/// A Picard correction above this aborts the step.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Condition numbers above this are logged as a warning.
pub const CONDITION_WARN: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: `{field}` {reason}")]
    Config { field: &'static str, reason: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("linear solve failed at t = {t}: {source}")]
    Linear {
        t: f64,
        #[source]
        source: SolveError,
    },
    #[error("Picard iteration did not converge at t = {t} after {iterations} passes (last correction {last_correction:e})")]
    PicardNotConverged {
        t: f64,
        iterations: usize,
        last_correction: f64,
    },
    #[error(
        "Picard iteration diverged at t = {t} on pass {iteration} (correction {correction:e})"
    )]
    PicardDiverged {
        t: f64,
        iteration: usize,
        correction: f64,
    },
}

impl SolverError {
    pub fn is_picard_failure(&self) -> bool {
        matches!(
            self,
            SolverError::PicardNotConverged { .. } | SolverError::PicardDiverged { .. }
        )
    }

    pub fn is_linear_failure(&self) -> bool {
        matches!(
            self,
            SolverError::Linear { .. } | SolverError::Assembly(AssemblyError::SingularMass(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Implicit weight in (0, 1]; 1 is backward difference.
    pub theta: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Assembly rule size; `None` selects [`default_point_count`].
    pub quad_points: Option<usize>,
    pub degree: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_end: 1.0,
            theta: 1.0,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max: DEFAULT_PICARD_MAX,
            quad_points: None,
            degree: 6,
        }
    }
}

/// Number of `step` intervals in `[0, span]`, or `None` when `span` is not a whole multiple.
pub fn whole_steps(span: f64, step: f64) -> Option<usize> {
    if !(span.is_finite() && step.is_finite()) || step <= 0.0 || span < 0.0 {
        return None;
    }
    let ratio = span / step;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        Some(rounded as usize)
    } else {
        None
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |field, reason: &str| {
            Err(SolverError::Config {
                field,
                reason: reason.into(),
            })
        };
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", "must be positive and finite");
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end", "must be non-negative and finite");
        }
        if whole_steps(self.t_end, self.dt).is_none() {
            return bad("t_end", "must be a whole multiple of dt");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta", "must lie in (0, 1]");
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return bad("picard_tol", "must be positive");
        }
        if self.picard_max == 0 {
            return bad("picard_max", "must be at least 1");
        }
        if self.quad_points == Some(0) {
            return bad("quad_points", "must be at least 1");
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        whole_steps(self.t_end, self.dt).unwrap_or(0)
    }

    pub fn assembly_points(&self) -> usize {
        self.quad_points
            .unwrap_or_else(|| default_point_count(self.degree))
    }

    /// Projection rule size: three times the assembly rule.
    pub fn projection_points(&self) -> usize {
        match self.quad_points {
            Some(n) => 3 * n,
            None => boosted_point_count(self.degree),
        }
    }
}

/// Coefficients of both species at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    pub c: DVector<f64>,
    pub d: DVector<f64>,
    pub t: f64,
    pub picard_iters_last: usize,
}

/// Problem, basis and cached assembly for repeated stepping.
#[derive(Debug, Clone)]
pub struct Solver {
    problem: ProblemSpec,
    basis: BasisSpec,
    config: SolverConfig,
    assembler: Assembler,
    scaled_mass: DMatrix<f64>,
}

impl Solver {
    pub fn new(problem: &ProblemSpec, config: &SolverConfig) -> Result<Self, SolverError> {
        problem.validate()?;
        config.validate()?;
        let basis = BasisSpec::new(problem.lower, problem.upper, config.degree)?;
        let rule = gauss_legendre(config.assembly_points(), problem.lower, problem.upper)?;
        let assembler = Assembler::new(problem, &basis, &rule)?;
        let scaled_mass = &assembler.fixed().mass / config.dt;
        Ok(Self {
            problem: problem.clone(),
            basis,
            config: config.clone(),
            assembler,
            scaled_mass,
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn assembler(&self) -> &Assembler {
        &self.assembler
    }

    /// State at `t = 0` from the Galerkin projection of the initial data.
    pub fn initial_state(&self) -> Result<CoefficientState, SolverError> {
        let rule = gauss_legendre(
            self.config.projection_points(),
            self.problem.lower,
            self.problem.upper,
        )?;
        let (c, d) = project_initial(&self.problem, &self.basis, &rule)?;
        Ok(CoefficientState {
            c,
            d,
            t: 0.0,
            picard_iters_last: 0,
        })
    }

    /// Block system for one Picard pass at iterate `(c, d)`.
    pub fn block_system(
        &self,
        prev: &CoefficientState,
        old_rates: &(DVector<f64>, DVector<f64>),
        c: &DVector<f64>,
        d: &DVector<f64>,
    ) -> Result<BlockSystem, SolveError> {
        let th = self.config.theta;
        let fixed = self.assembler.fixed();
        let it = self.assembler.iterate(c.as_slice(), d.as_slice());
        let mut rhs_m = &self.scaled_mass * &prev.c + &it.f1 * th;
        let mut rhs_n = &self.scaled_mass * &prev.d + &it.f2 * th;
        if th < 1.0 {
            rhs_m += &old_rates.0 * (1.0 - th);
            rhs_n += &old_rates.1 * (1.0 - th);
        }
        BlockSystem::from_blocks(
            &(&self.scaled_mass + &fixed.k1 * th),
            &(&it.k2 * th),
            &(&it.k3 * th),
            &(&self.scaled_mass + &fixed.k4 * th),
            &rhs_m,
            &rhs_n,
        )
    }

    fn old_rates(&self, prev: &CoefficientState) -> (DVector<f64>, DVector<f64>) {
        if self.config.theta < 1.0 {
            self.assembler.rates(&prev.c, &prev.d)
        } else {
            let n = self.basis.len();
            (DVector::zeros(n), DVector::zeros(n))
        }
    }

    /// One Picard-converged pass from the iterate `(c, d)`; returns the new iterate.
    pub fn picard_pass(
        &self,
        prev: &CoefficientState,
        c: &DVector<f64>,
        d: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>), SolverError> {
        let rates = self.old_rates(prev);
        self.pass_with(prev, &rates, c, d)
    }

    fn pass_with(
        &self,
        prev: &CoefficientState,
        rates: &(DVector<f64>, DVector<f64>),
        c: &DVector<f64>,
        d: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>), SolverError> {
        let t = prev.t + self.config.dt;
        let linear = |source| SolverError::Linear { t, source };
        let system = self.block_system(prev, rates, c, d).map_err(linear)?;
        let x = LuFactors::factor(&system.matrix)
            .and_then(|lu| lu.solve(&system.rhs))
            .map_err(linear)?;
        let n = self.basis.len();
        Ok((x.rows(0, n).into_owned(), x.rows(n, n).into_owned()))
    }

    /// Advances `state` by one time increment.
    pub fn step(&self, state: &CoefficientState) -> Result<CoefficientState, SolverError> {
        self.step_to(state, state.t + self.config.dt)
    }

    fn step_to(
        &self,
        state: &CoefficientState,
        t_new: f64,
    ) -> Result<CoefficientState, SolverError> {
        let rates = self.old_rates(state);
        let mut c = state.c.clone();
        let mut d = state.d.clone();
        let mut correction = f64::INFINITY;
        for iteration in 1..=self.config.picard_max {
            let (c_next, d_next) = self.pass_with(state, &rates, &c, &d)?;
            correction = (&c_next - &c).amax().max((&d_next - &d).amax());
            c = c_next;
            d = d_next;
            if !correction.is_finite() || correction > DIVERGENCE_LIMIT {
                return Err(SolverError::PicardDiverged {
                    t: t_new,
                    iteration,
                    correction,
                });
            }
            if correction < self.config.picard_tol {
                return Ok(CoefficientState {
                    c,
                    d,
                    t: t_new,
                    picard_iters_last: iteration,
                });
            }
        }
        Err(SolverError::PicardNotConverged {
            t: t_new,
            iterations: self.config.picard_max,
            last_correction: correction,
        })
    }

    /// Infinity-norm condition number of the block matrix at `state`.
    pub fn condition_number(&self, state: &CoefficientState) -> Result<f64, SolverError> {
        let rates = self.old_rates(state);
        let t = state.t;
        let system = self
            .block_system(state, &rates, &state.c, &state.d)
            .map_err(|source| SolverError::Linear { t, source })?;
        condition_estimate(&system.matrix).map_err(|source| SolverError::Linear { t, source })
    }

    /// Projected initial state followed by every step up to `t_end`.
    pub fn run(&self) -> Result<Vec<CoefficientState>, SolverError> {
        let mut out = Vec::with_capacity(self.config.step_count() + 1);
        self.run_with(|s| out.push(s.clone()))?;
        Ok(out)
    }

    /// Runs the trajectory, passing each state (including `t = 0`) to `visit`.
    /// Returns the final state.
    pub fn run_with<F: FnMut(&CoefficientState)>(
        &self,
        mut visit: F,
    ) -> Result<CoefficientState, SolverError> {
        let mut state = self.initial_state()?;
        let kappa = self.condition_number(&state)?;
        if kappa > CONDITION_WARN {
            warn!("block matrix condition number {kappa:.3e} exceeds {CONDITION_WARN:e}");
        } else {
            info!("block matrix condition number {kappa:.3e}");
        }
        visit(&state);
        let steps = self.config.step_count();
        for k in 1..=steps {
            // time levels come from the step index, not accumulated sums
            state = self.step_to(&state, k as f64 * self.config.dt)?;
            debug!(
                "t = {:.6} converged in {} Picard passes",
                state.t, state.picard_iters_last
            );
            visit(&state);
        }
        Ok(state)
    }

    /// States at the requested output times only (each a multiple of `dt`).
    pub fn run_sampled(&self, times: &[f64]) -> Result<Vec<CoefficientState>, SolverError> {
        let mut wanted = Vec::with_capacity(times.len());
        for &t in times {
            match whole_steps(t, self.config.dt) {
                Some(k) if k <= self.config.step_count() => wanted.push(k),
                _ => {
                    return Err(SolverError::Config {
                        field: "report_times",
                        reason: format!("{t} is not a multiple of dt within [0, t_end]"),
                    })
                }
            }
        }
        let mut out = Vec::with_capacity(times.len());
        let mut index = 0usize;
        self.run_with(|s| {
            for _ in wanted.iter().filter(|&&k| k == index) {
                out.push(s.clone());
            }
            index += 1;
        })?;
        // restore the caller's ordering
        let mut ordered = Vec::with_capacity(times.len());
        for &k in &wanted {
            let t = k as f64 * self.config.dt;
            if let Some(s) = out.iter().find(|s| (s.t - t).abs() <= 1e-9 * t.max(1.0)) {
                ordered.push(s.clone());
            }
        }
        Ok(ordered)
    }
}

/// Advances `state` one step; builds a fresh [`Solver`] on every call.
pub fn step(
    state: &CoefficientState,
    problem: &ProblemSpec,
    config: &SolverConfig,
) -> Result<CoefficientState, SolverError> {
    Solver::new(problem, config)?.step(state)
}

/// Full trajectory at every time level `0, dt, ..., t_end`.
pub fn run(
    problem: &ProblemSpec,
    config: &SolverConfig,
) -> Result<Vec<CoefficientState>, SolverError> {
    Solver::new(problem, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ReactionForm, SineProfile};
    use approx::assert_relative_eq;

    /// Linear heat equation on [0, 1] with zero boundary data.
    pub(crate) fn heat_problem() -> ProblemSpec {
        let zero = SineProfile {
            amplitude: 0.0,
            power: 1,
            shift: 0.0,
            width: 1.0,
            offset: 0.0,
        };
        ProblemSpec {
            lower: 0.0,
            upper: 1.0,
            eps1: 1.0,
            eps2: 1.0,
            p: 0.0,
            q: 0.0,
            theta0: 0.0,
            gamma0: 0.0,
            // M^2 N with N = 0 and d = 0 keeps f identically zero
            reaction: ReactionForm {
                exponent_m: 2,
                exponent_n: 1,
            },
            sign_m: 1.0,
            sign_n: 1.0,
            source_m: 0.0,
            source_n: 0.0,
            decay_m: 0.0,
            decay_n: 0.0,
            initial_m: zero,
            initial_n: zero,
        }
    }

    #[test]
    fn single_heat_step_closed_form() {
        let p = heat_problem();
        let cfg = SolverConfig {
            dt: 0.1,
            t_end: 0.1,
            degree: 0,
            ..SolverConfig::default()
        };
        let start = CoefficientState {
            c: DVector::from_element(1, 1.0),
            d: DVector::zeros(1),
            t: 0.0,
            picard_iters_last: 0,
        };
        let next = step(&start, &p, &cfg).unwrap();
        // (1/30/0.1 + 1/3) c = (1/30/0.1) * 1
        assert_relative_eq!(next.c[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(next.t, 0.1);
    }

    #[test]
    fn grayscott_rest_state_is_stationary() {
        let p = ProblemSpec::builtin_grayscott();
        let cfg = SolverConfig::default();
        let solver = Solver::new(&p, &cfg).unwrap();
        let rest = CoefficientState {
            c: DVector::zeros(7),
            d: DVector::zeros(7),
            t: 0.0,
            picard_iters_last: 0,
        };
        let next = solver.step(&rest).unwrap();
        assert!(next.c.iter().chain(next.d.iter()).all(|&v| v == 0.0));
        assert_eq!(next.picard_iters_last, 1);
    }

    #[test]
    fn trajectory_lengths() {
        let p = ProblemSpec::builtin_tp1();
        let cfg = SolverConfig {
            t_end: 0.0,
            ..SolverConfig::default()
        };
        assert_eq!(run(&p, &cfg).unwrap().len(), 1);
        let cfg = SolverConfig {
            t_end: 2.0,
            ..SolverConfig::default()
        };
        let traj = run(&p, &cfg).unwrap();
        assert_eq!(traj.len(), 21);
        assert_relative_eq!(traj[20].t, 2.0);
    }

    #[test]
    fn sampled_run_picks_requested_levels() {
        let p = ProblemSpec::builtin_tp1();
        let cfg = SolverConfig {
            t_end: 2.0,
            ..SolverConfig::default()
        };
        let solver = Solver::new(&p, &cfg).unwrap();
        let full = solver.run().unwrap();
        let picked = solver.run_sampled(&[2.0, 0.0, 1.0]).unwrap();
        assert_eq!(picked.len(), 3);
        assert_eq!(picked[0], full[20]);
        assert_eq!(picked[1], full[0]);
        assert_eq!(picked[2], full[10]);
        assert!(solver.run_sampled(&[0.15]).is_err());
        assert!(solver.run_sampled(&[3.0]).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        ok.validate().unwrap();
        let field_of = |cfg: SolverConfig| match cfg.validate() {
            Err(SolverError::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(
            field_of(SolverConfig {
                dt: 0.0,
                ..ok.clone()
            }),
            "dt"
        );
        assert_eq!(
            field_of(SolverConfig {
                t_end: 1.05,
                ..ok.clone()
            }),
            "t_end"
        );
        assert_eq!(
            field_of(SolverConfig {
                theta: 0.0,
                ..ok.clone()
            }),
            "theta"
        );
        assert_eq!(
            field_of(SolverConfig {
                theta: 1.5,
                ..ok.clone()
            }),
            "theta"
        );
        assert_eq!(
            field_of(SolverConfig {
                picard_tol: 0.0,
                ..ok.clone()
            }),
            "picard_tol"
        );
        assert_eq!(
            field_of(SolverConfig {
                picard_max: 0,
                ..ok.clone()
            }),
            "picard_max"
        );
        assert_eq!(
            field_of(SolverConfig {
                quad_points: Some(0),
                ..ok
            }),
            "quad_points"
        );
    }

    #[test]
    fn whole_step_detection() {
        assert_eq!(whole_steps(2.0, 0.1), Some(20));
        assert_eq!(whole_steps(10.0, 0.05), Some(200));
        assert_eq!(whole_steps(0.0, 0.1), Some(0));
        assert_eq!(whole_steps(1.05, 0.1), None);
        assert_eq!(whole_steps(1.0, 0.0), None);
        assert_eq!(whole_steps(-1.0, 0.1), None);
    }

    #[test]
    fn picard_budget_exhaustion_is_reported() {
        let p = ProblemSpec::builtin_grayscott();
        let cfg = SolverConfig {
            picard_max: 1,
            picard_tol: 1e-30,
            ..SolverConfig::default()
        };
        let solver = Solver::new(&p, &cfg).unwrap();
        let s0 = solver.initial_state().unwrap();
        match solver.step(&s0) {
            Err(SolverError::PicardNotConverged { iterations: 1, .. }) => {}
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn tp1_center_after_one_time_unit() {
        let p = ProblemSpec::builtin_tp1();
        let cfg = SolverConfig {
            t_end: 1.0,
            ..SolverConfig::default()
        };
        let solver = Solver::new(&p, &cfg).unwrap();
        let last = solver.run_with(|_| {}).unwrap();
        let b = solver.basis();
        let m: f64 = p.theta0
            + (0..7)
                .map(|j| last.c[j] * b.eval(j, 1.0).unwrap())
                .sum::<f64>();
        assert!((m + 0.00877).abs() < 1e-3, "M(1, 1) = {m}");
    }
}
