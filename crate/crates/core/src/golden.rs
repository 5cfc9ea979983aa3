//! Golden-table regression checks.
//!
//! Goldens are plain CSV with header `problem,species,x,t,value,tol,source`;
//! lines starting with `#` are comments.

use std::fmt;

use thiserror::Error;

use crate::basis::BasisSpec;
use crate::norms::{evaluate, find_time};
use crate::problem::{ProblemId, ProblemSpec};
use crate::stepper::{run, CoefficientState, SolverConfig, SolverError};

pub const GOLDEN_HEADER: &str = "problem,species,x,t,value,tol,source";

/// Bundled goldens for the two built-in problems.
pub const BUILTIN_GOLDENS: &str = include_str!("../data/goldens.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GoldenError {
    #[error("golden file is missing the header `{GOLDEN_HEADER}`")]
    MissingHeader,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("no trajectory state at t = {0}")]
    MissingTime(f64),
    #[error("x = {0} lies outside the problem domain")]
    OutOfDomain(f64),
    #[error("no goldens for problem `{0}`")]
    NoEntries(ProblemId),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    M,
    N,
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Species::M => "M",
            Species::N => "N",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenEntry {
    pub problem: ProblemId,
    pub species: Species,
    pub x: f64,
    pub t: f64,
    pub value: f64,
    pub tolerance: f64,
    pub source: String,
}

fn parse_number(field: &str, name: &str, line: usize) -> Result<f64, GoldenError> {
    let v: f64 = field.trim().parse().map_err(|_| GoldenError::Parse {
        line,
        reason: format!("`{name}` is not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(GoldenError::Parse {
            line,
            reason: format!("`{name}` must be finite"),
        });
    }
    Ok(v)
}

pub fn parse_goldens(text: &str) -> Result<Vec<GoldenEntry>, GoldenError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_ok = reader
        .headers()
        .map(|h| h.iter().eq(GOLDEN_HEADER.split(',')))
        .unwrap_or(false);
    if !header_ok {
        return Err(GoldenError::MissingHeader);
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| GoldenError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: match e.kind() {
                csv::ErrorKind::UnequalLengths { len, .. } => {
                    format!("expected 7 fields, found {len}")
                }
                _ => e.to_string(),
            },
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<&str> = record.iter().collect();
        let problem: ProblemId = fields[0]
            .parse()
            .map_err(|reason| GoldenError::Parse { line, reason })?;
        let species = match fields[1] {
            "M" => Species::M,
            "N" => Species::N,
            other => {
                return Err(GoldenError::Parse {
                    line,
                    reason: format!("unknown species {other:?}"),
                })
            }
        };
        let x = parse_number(fields[2], "x", line)?;
        let t = parse_number(fields[3], "t", line)?;
        let value = parse_number(fields[4], "value", line)?;
        let tolerance = parse_number(fields[5], "tol", line)?;
        if tolerance <= 0.0 {
            return Err(GoldenError::Parse {
                line,
                reason: "`tol` must be positive".into(),
            });
        }
        if t < 0.0 {
            return Err(GoldenError::Parse {
                line,
                reason: "`t` must be non-negative".into(),
            });
        }
        let source = fields[6];
        if !source.starts_with("table") {
            return Err(GoldenError::Parse {
                line,
                reason: format!("source {source:?} does not name a table"),
            });
        }
        out.push(GoldenEntry {
            problem,
            species,
            x,
            t,
            value,
            tolerance,
            source: source.to_string(),
        });
    }
    Ok(out)
}

pub fn builtin_goldens() -> Vec<GoldenEntry> {
    parse_goldens(BUILTIN_GOLDENS).expect("bundled golden file parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryVerdict {
    pub entry: GoldenEntry,
    pub computed: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// Two goldens mirrored about the domain midpoint; passes only if both do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVerdict {
    pub first: usize,
    pub second: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GoldenReport {
    pub verdicts: Vec<EntryVerdict>,
    pub pairs: Vec<PairVerdict>,
}

impl GoldenReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass) && self.pairs.iter().all(|p| p.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EntryVerdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    /// Entry with the largest deviation relative to its tolerance.
    pub fn worst(&self) -> Option<&EntryVerdict> {
        self.verdicts.iter().max_by(|a, b| {
            (a.deviation / a.entry.tolerance).total_cmp(&(b.deviation / b.entry.tolerance))
        })
    }
}

impl fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let failed = self.failures().count();
        write!(
            f,
            "{} of {} goldens within tolerance",
            self.verdicts.len() - failed,
            self.verdicts.len()
        )?;
        if let Some(w) = self.worst() {
            write!(
                f,
                "; worst {}({}, {}) = {:.6} vs {} (|dev| {:.2e}, tol {:.0e})",
                w.entry.species,
                w.entry.x,
                w.entry.t,
                w.computed,
                w.entry.value,
                w.deviation,
                w.entry.tolerance
            )?;
        }
        Ok(())
    }
}

/// Compares every entry against the trajectory; all entries must belong to `problem`.
pub fn check_goldens(
    entries: &[GoldenEntry],
    trajectory: &[CoefficientState],
    problem: &ProblemSpec,
    basis: &BasisSpec,
) -> Result<GoldenReport, GoldenError> {
    let mut report = GoldenReport::default();
    for e in entries {
        let state = find_time(trajectory, e.t).ok_or(GoldenError::MissingTime(e.t))?;
        let (m, n) =
            evaluate(state, problem, basis, e.x).map_err(|_| GoldenError::OutOfDomain(e.x))?;
        let computed = match e.species {
            Species::M => m,
            Species::N => n,
        };
        let deviation = (computed - e.value).abs();
        report.verdicts.push(EntryVerdict {
            entry: e.clone(),
            computed,
            deviation,
            pass: deviation <= e.tolerance,
        });
    }
    let mirror_tol = 1e-9 * (problem.upper - problem.lower);
    for i in 0..entries.len() {
        let a = &entries[i];
        let mirror = problem.lower + problem.upper - a.x;
        if (mirror - a.x).abs() <= mirror_tol {
            continue;
        }
        let partner = (i + 1..entries.len()).find(|&j| {
            let b = &entries[j];
            b.problem == a.problem
                && b.species == a.species
                && (b.t - a.t).abs() <= 1e-9
                && (b.x - mirror).abs() <= mirror_tol
        });
        if let Some(j) = partner {
            report.pairs.push(PairVerdict {
                first: i,
                second: j,
                pass: report.verdicts[i].pass && report.verdicts[j].pass,
            });
        }
    }
    Ok(report)
}

/// The entries for one problem.
pub fn goldens_for(entries: &[GoldenEntry], problem: ProblemId) -> Vec<GoldenEntry> {
    entries
        .iter()
        .filter(|e| e.problem == problem)
        .cloned()
        .collect()
}

/// Runs `problem` once per theta and checks the entries of `id` against each run.
///
/// Only `theta` and `t_end` (the latest golden time) are taken from the sweep;
/// everything else comes from `config`.
pub fn theta_sweep(
    entries: &[GoldenEntry],
    id: ProblemId,
    problem: &ProblemSpec,
    config: &SolverConfig,
    thetas: &[f64],
) -> Result<Vec<(f64, GoldenReport)>, GoldenError> {
    let selected = goldens_for(entries, id);
    let t_end = selected
        .iter()
        .map(|e| e.t)
        .reduce(f64::max)
        .ok_or(GoldenError::NoEntries(id))?;
    let basis =
        BasisSpec::new(problem.lower, problem.upper, config.degree).map_err(SolverError::from)?;
    thetas
        .iter()
        .map(|&theta| {
            let cfg = SolverConfig {
                theta,
                t_end,
                ..config.clone()
            };
            let trajectory = run(problem, &cfg)?;
            Ok((
                theta,
                check_goldens(&selected, &trajectory, problem, &basis)?,
            ))
        })
        .collect()
}
