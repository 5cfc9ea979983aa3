//! Run configuration from argv and an optional JSON file.
//!
//! Flags override file values. Missing required values and invalid
//! combinations are reported with the offending field name.

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use rdgalerkin::norms::DEFAULT_GRID_POINTS;
use rdgalerkin::problem::ProblemId;
use rdgalerkin::stepper::{whole_steps, SolverConfig, DEFAULT_PICARD_MAX, DEFAULT_PICARD_TOL};

use crate::CliError;

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub custom_path: Option<PathBuf>,
    pub degree: usize,
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub quad_points: Option<usize>,
    /// Uniform grid size for the convergence norms.
    pub grid_points: usize,
    /// Uniform grid size for `solution.csv` and the plots.
    pub sample_points: usize,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub convergence_dts: Option<Vec<f64>>,
    pub report_times: Vec<f64>,
    pub verbosity: u8,
}

impl RunConfig {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            theta: self.theta,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            quad_points: self.quad_points,
            degree: self.degree,
        }
    }
}

/// Every field optional: the shape of a `--config` file and of parsed flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub problem: Option<ProblemId>,
    pub custom_path: Option<PathBuf>,
    pub degree: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub theta: Option<f64>,
    pub picard_tol: Option<f64>,
    pub picard_max: Option<usize>,
    pub quad_points: Option<usize>,
    pub grid_points: Option<usize>,
    pub sample_points: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub emit_svg: Option<bool>,
    pub convergence_dts: Option<Vec<f64>>,
    pub report_times: Option<Vec<f64>>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Json {
            what: "run config",
            message: e.to_string(),
        })
    }

    /// `self` with every value set in `over` replaced.
    pub fn overridden_by(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            problem: over.problem.or(self.problem),
            custom_path: over.custom_path.or(self.custom_path),
            degree: over.degree.or(self.degree),
            dt: over.dt.or(self.dt),
            t_end: over.t_end.or(self.t_end),
            theta: over.theta.or(self.theta),
            picard_tol: over.picard_tol.or(self.picard_tol),
            picard_max: over.picard_max.or(self.picard_max),
            quad_points: over.quad_points.or(self.quad_points),
            grid_points: over.grid_points.or(self.grid_points),
            sample_points: over.sample_points.or(self.sample_points),
            output_dir: over.output_dir.or(self.output_dir),
            emit_svg: over.emit_svg.or(self.emit_svg),
            convergence_dts: over.convergence_dts.or(self.convergence_dts),
            report_times: over.report_times.or(self.report_times),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rdgalerkin",
    version,
    about = "Bernstein-Galerkin solver for two-species reaction-diffusion systems"
)]
pub struct Flags {
    /// JSON file with any subset of the run settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// tp1, grayscott or custom
    #[arg(long)]
    pub problem: Option<ProblemId>,
    /// Problem description for `--problem custom`.
    #[arg(long = "custom", value_name = "FILE")]
    pub custom_path: Option<PathBuf>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "picard-tol")]
    pub picard_tol: Option<f64>,
    #[arg(long = "picard-max")]
    pub picard_max: Option<usize>,
    #[arg(long = "quad-points")]
    pub quad_points: Option<usize>,
    /// Grid size for the convergence norms.
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Grid size for solution.csv and the plots.
    #[arg(long = "sample-points")]
    pub sample_points: Option<usize>,
    #[arg(short = 'o', long = "output-dir", value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    /// Also write one SVG profile plot per report time.
    #[arg(long = "svg")]
    pub emit_svg: bool,
    /// Comma-separated increments for a self-convergence study at t_end.
    #[arg(long = "convergence-dts", value_delimiter = ',', num_args = 1..)]
    pub convergence_dts: Option<Vec<f64>>,
    /// Comma-separated output times (default: 0, every whole time unit, t_end).
    #[arg(long = "report-times", value_delimiter = ',', num_args = 1..)]
    pub report_times: Option<Vec<f64>>,
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl Flags {
    fn into_partial(self) -> (Option<PathBuf>, PartialConfig, u8) {
        let partial = PartialConfig {
            problem: self.problem,
            custom_path: self.custom_path,
            degree: self.degree,
            dt: self.dt,
            t_end: self.t_end,
            theta: self.theta,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            quad_points: self.quad_points,
            grid_points: self.grid_points,
            sample_points: self.sample_points,
            output_dir: self.output_dir,
            emit_svg: self.emit_svg.then_some(true),
            convergence_dts: self.convergence_dts,
            report_times: self.report_times,
        };
        (self.config, partial, self.verbose)
    }
}

/// Default sample count: the x spacing of the published tables.
fn default_sample_points(problem: ProblemId) -> usize {
    match problem {
        ProblemId::GrayScott => 11,
        ProblemId::Tp1 | ProblemId::Custom => 21,
    }
}

/// 0, every whole time unit that lands on a step, and `t_end`.
pub fn default_report_times(dt: f64, t_end: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let whole = t_end.floor() as usize;
    out.extend(
        (1..=whole)
            .map(|k| k as f64)
            .filter(|&t| whole_steps(t, dt).is_some()),
    );
    if out.last() != Some(&t_end) {
        out.push(t_end);
    }
    out
}

fn invalid(field: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Applies defaults and checks every invariant.
pub fn finalize(p: PartialConfig, verbosity: u8) -> Result<RunConfig, CliError> {
    let problem = p.problem.ok_or(CliError::Missing("problem"))?;
    let dt = p.dt.ok_or(CliError::Missing("dt"))?;
    let t_end = p.t_end.ok_or(CliError::Missing("t_end"))?;
    match (problem, &p.custom_path) {
        (ProblemId::Custom, None) => return Err(CliError::Missing("custom_path")),
        (ProblemId::Tp1 | ProblemId::GrayScott, Some(_)) => {
            return Err(invalid(
                "custom_path",
                "is only allowed with problem = custom",
            ))
        }
        _ => {}
    }
    let cfg = RunConfig {
        problem,
        custom_path: p.custom_path,
        degree: p.degree.unwrap_or(6),
        dt,
        t_end,
        theta: p.theta.unwrap_or(1.0),
        picard_tol: p.picard_tol.unwrap_or(DEFAULT_PICARD_TOL),
        picard_max: p.picard_max.unwrap_or(DEFAULT_PICARD_MAX),
        quad_points: p.quad_points,
        grid_points: p.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
        sample_points: p.sample_points.unwrap_or(default_sample_points(problem)),
        output_dir: p.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        emit_svg: p.emit_svg.unwrap_or(false),
        convergence_dts: p.convergence_dts,
        report_times: p
            .report_times
            .unwrap_or_else(|| default_report_times(dt, t_end)),
        verbosity,
    };
    cfg.solver_config().validate().map_err(|e| match e {
        rdgalerkin::stepper::SolverError::Config { field, reason } => invalid(field, reason),
        other => CliError::Solver(other),
    })?;
    if cfg.degree > rdgalerkin::basis::MAX_DEGREE {
        return Err(invalid(
            "degree",
            format!("must be at most {}", rdgalerkin::basis::MAX_DEGREE),
        ));
    }
    if cfg.grid_points < 2 {
        return Err(invalid("grid_points", "must be at least 2"));
    }
    if cfg.sample_points < 2 {
        return Err(invalid("sample_points", "must be at least 2"));
    }
    if cfg.report_times.is_empty() {
        return Err(invalid("report_times", "must not be empty"));
    }
    for &t in &cfg.report_times {
        if !(t.is_finite() && t >= 0.0 && t <= cfg.t_end * (1.0 + 1e-12)) {
            return Err(invalid(
                "report_times",
                format!("{t} is outside [0, t_end]"),
            ));
        }
        if whole_steps(t, dt).is_none() {
            return Err(invalid(
                "report_times",
                format!("{t} is not a whole multiple of dt = {dt}"),
            ));
        }
    }
    if let Some(dts) = &cfg.convergence_dts {
        if dts.is_empty() {
            return Err(invalid("convergence_dts", "must not be empty"));
        }
        for &h in dts {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid(
                    "convergence_dts",
                    format!("{h} is not a positive increment"),
                ));
            }
            if whole_steps(t_end, 0.5 * h).is_none() || whole_steps(t_end, h).is_none() {
                return Err(invalid(
                    "convergence_dts",
                    format!(
                        "t_end = {t_end} is not a whole multiple of {h} and {}",
                        0.5 * h
                    ),
                ));
            }
        }
    }
    Ok(cfg)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `argv` (including the program name) and merges an optional `--config` file.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = Flags::try_parse_from(argv).map_err(CliError::Args)?;
    let (config_path, from_flags, verbosity) = flags.into_partial();
    let merged = match config_path {
        Some(path) => PartialConfig::from_json(&read_text(&path)?)?.overridden_by(from_flags),
        None => from_flags,
    };
    finalize(merged, verbosity)
}
