use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;

use rdgalerkin::norms::{convergence_table, evaluate, uniform_grid, FieldSample};
use rdgalerkin::problem::{ProblemId, ProblemSpec};
use rdgalerkin::stepper::Solver;

use crate::config::RunConfig;
use crate::custom::CustomProblem;
use crate::output::{norms_csv, profile_name, profile_svg, solution_csv};
use crate::CliError;

/// Plot resolution, independent of the tabulated samples.
const PLOT_POINTS: usize = 201;

/// The problem a config selects, loading the custom file if needed.
pub fn load_problem(cfg: &RunConfig) -> Result<ProblemSpec, CliError> {
    if let Some(spec) = cfg.problem.builtin() {
        return Ok(spec);
    }
    debug_assert_eq!(cfg.problem, ProblemId::Custom);
    let path = cfg
        .custom_path
        .as_ref()
        .ok_or(CliError::Missing("custom_path"))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    CustomProblem::from_json(&text)?.to_spec()
}

/// Contents of every output file, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub files: Vec<(String, String)>,
    pub summary: Vec<String>,
}

/// Solves and renders all outputs without touching the filesystem.
pub fn run_outputs(cfg: &RunConfig, problem: &ProblemSpec) -> Result<RunOutputs, CliError> {
    let solver_cfg = cfg.solver_config();
    let solver = Solver::new(problem, &solver_cfg)?;
    let states = solver.run_sampled(&cfg.report_times)?;
    let xs = uniform_grid(problem.lower, problem.upper, cfg.sample_points);
    let plot_xs = uniform_grid(problem.lower, problem.upper, PLOT_POINTS);
    let mut samples = Vec::with_capacity(xs.len() * states.len());
    let mut files = Vec::new();
    let mut summary = Vec::with_capacity(states.len());
    for (state, &t) in states.iter().zip(&cfg.report_times) {
        let mut ms = Vec::with_capacity(xs.len());
        let mut ns = Vec::with_capacity(xs.len());
        for &x in &xs {
            let (m, n) = evaluate(state, problem, solver.basis(), x)
                .map_err(rdgalerkin::stepper::SolverError::from)?;
            samples.push(FieldSample { x, t, m, n });
            ms.push(m);
            ns.push(n);
        }
        let range = |v: &[f64]| {
            (
                v.iter().copied().fold(f64::INFINITY, f64::min),
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let ((m_lo, m_hi), (n_lo, n_hi)) = (range(&ms), range(&ns));
        let mid = xs.len() / 2;
        summary.push(format!(
            "t = {t:<8} M(mid) = {:>+.6e}  M in [{m_lo:+.4e}, {m_hi:+.4e}]  N(mid) = {:>+.6e}  N in [{n_lo:+.4e}, {n_hi:+.4e}]  picard = {}",
            ms[mid], ns[mid], state.picard_iters_last
        ));
        if cfg.emit_svg {
            let mut pm = Vec::with_capacity(plot_xs.len());
            let mut pn = Vec::with_capacity(plot_xs.len());
            for &x in &plot_xs {
                let (m, n) = evaluate(state, problem, solver.basis(), x)
                    .map_err(rdgalerkin::stepper::SolverError::from)?;
                pm.push(m);
                pn.push(n);
            }
            files.push((profile_name(t), profile_svg(t, &plot_xs, &pm, &pn)));
        }
    }
    files.insert(0, ("solution.csv".to_string(), solution_csv(&samples)));
    if let Some(dts) = &cfg.convergence_dts {
        info!(
            "convergence study over {} increments at t = {}",
            dts.len(),
            cfg.t_end
        );
        let rows = convergence_table(problem, &solver_cfg, dts, cfg.t_end, cfg.grid_points)?;
        files.insert(1, ("norms.csv".to_string(), norms_csv(&rows)));
    }
    Ok(RunOutputs { files, summary })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Runs the configured problem, writes every output and prints one summary
/// line per report time to `out`. Returns the written paths.
pub fn run_and_emit<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<Vec<PathBuf>, CliError> {
    let problem = load_problem(cfg)?;
    let outputs = run_outputs(cfg, &problem)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|source| CliError::Io {
        path: cfg.output_dir.clone(),
        source,
    })?;
    let mut written = Vec::with_capacity(outputs.files.len());
    for (name, contents) in &outputs.files {
        written.push(write_file(&cfg.output_dir, name, contents)?);
    }
    let stdout_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    for line in &outputs.summary {
        writeln!(out, "{line}").map_err(stdout_err)?;
    }
    Ok(written)
}
