//! Command-line front end: configuration, orchestration and file output.

use std::path::PathBuf;

use thiserror::Error;

use rdgalerkin::norms::EvalError;
use rdgalerkin::problem::ProblemError;
use rdgalerkin::stepper::SolverError;

pub mod config;
pub mod custom;
pub mod output;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use run::run_and_emit;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PICARD: i32 = 3;
pub const EXIT_LINEAR: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Args(#[from] clap::Error),
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("invalid setting `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("invalid {what} JSON: {message}")]
    Json { what: &'static str, message: String },
    #[error("invalid problem: {0}")]
    Problem(ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Args(_)
            | CliError::Missing(_)
            | CliError::Invalid { .. }
            | CliError::Json { .. }
            | CliError::Problem(_) => EXIT_CONFIG,
            CliError::Solver(e) | CliError::Eval(EvalError::Solver(e)) => solver_exit(e),
            CliError::Eval(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn solver_exit(e: &SolverError) -> i32 {
    if e.is_picard_failure() {
        EXIT_PICARD
    } else if e.is_linear_failure() {
        EXIT_LINEAR
    } else {
        EXIT_CONFIG
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdgalerkin::dense_solve::SolveError;

    #[test]
    fn exit_codes_are_disjoint() {
        let picard = CliError::Solver(SolverError::PicardNotConverged {
            t: 0.1,
            iterations: 1,
            last_correction: 1.0,
        });
        let linear = CliError::Eval(EvalError::Solver(SolverError::Linear {
            t: 0.1,
            source: SolveError::Singular {
                index: 0,
                pivot: 0.0,
            },
        }));
        let io = CliError::Io {
            path: "x".into(),
            source: std::io::Error::other("boom"),
        };
        let config = CliError::Missing("dt");
        let codes: Vec<i32> = [&config, &picard, &linear, &io]
            .iter()
            .map(|e| e.exit_code())
            .collect();
        assert_eq!(codes, vec![EXIT_CONFIG, EXIT_PICARD, EXIT_LINEAR, EXIT_IO]);
        assert!(config.to_string().contains("dt"));
    }
}
