//! Two-species reaction-diffusion problems.
//!
//! Each species obeys
//!
//! ```text
//! du/dt = eps * u_xx + sign * f(M, N) - decay * u + source
//! ```
//!
//! with `f(M, N) = M^alpha N^beta` and constant Dirichlet data on both ends.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::BasisSpec;

/// Tolerance for boundary/initial compatibility at construction time.
pub const COMPATIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid domain [{lower}, {upper}]")]
    InvalidDomain { lower: f64, upper: f64 },
    #[error("diffusion coefficient `{name}` must be positive and finite, got {value}")]
    NonPositiveDiffusion { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("reaction sign `{name}` must be +1 or -1, got {value}")]
    InvalidSign { name: &'static str, value: f64 },
    #[error("reaction M^{alpha} N^{beta} is not nonlinear (alpha + beta must be at least 2)")]
    LinearReaction { alpha: u32, beta: u32 },
    #[error("initial profile `{name}` is invalid: {reason}")]
    InvalidProfile { name: &'static str, reason: String },
    #[error("initial_{species} at x = {x} is {value}, expected boundary constant {expected}")]
    IncompatibleInitialData {
        species: char,
        x: f64,
        value: f64,
        expected: f64,
    },
}

/// Named problem selector shared by the CLI and the golden tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Tp1,
    #[serde(rename = "grayscott")]
    GrayScott,
    Custom,
}

impl ProblemId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::Tp1 => "tp1",
            ProblemId::GrayScott => "grayscott",
            ProblemId::Custom => "custom",
        }
    }

    /// The built-in problem, or `None` for `Custom`.
    pub fn builtin(&self) -> Option<ProblemSpec> {
        match self {
            ProblemId::Tp1 => Some(ProblemSpec::builtin_tp1()),
            ProblemId::GrayScott => Some(ProblemSpec::builtin_grayscott()),
            ProblemId::Custom => None,
        }
    }
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProblemId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tp1" => Ok(ProblemId::Tp1),
            "grayscott" => Ok(ProblemId::GrayScott),
            "custom" => Ok(ProblemId::Custom),
            other => Err(format!(
                "unknown problem `{other}` (expected tp1, grayscott or custom)"
            )),
        }
    }
}

/// Reaction term `f(M, N) = M^alpha N^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionForm {
    pub exponent_m: u32,
    pub exponent_n: u32,
}

impl ReactionForm {
    pub fn new(exponent_m: u32, exponent_n: u32) -> Result<Self, ProblemError> {
        if exponent_m + exponent_n < 2 {
            return Err(ProblemError::LinearReaction {
                alpha: exponent_m,
                beta: exponent_n,
            });
        }
        Ok(Self {
            exponent_m,
            exponent_n,
        })
    }

    pub fn eval(&self, m: f64, n: f64) -> f64 {
        m.powi(self.exponent_m as i32) * n.powi(self.exponent_n as i32)
    }
}

/// `amplitude * sin^power(pi * (x - shift) / width) + offset`.
///
/// Covers the initial data of both built-in problems and is the only
/// family accepted in custom problem files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineProfile {
    pub amplitude: f64,
    pub power: u32,
    pub shift: f64,
    pub width: f64,
    pub offset: f64,
}

impl SineProfile {
    pub fn eval(&self, x: f64) -> f64 {
        let s = (PI * (x - self.shift) / self.width).sin();
        self.amplitude * s.powi(self.power as i32) + self.offset
    }

    fn validate(&self, name: &'static str) -> Result<(), ProblemError> {
        let fields = [self.amplitude, self.shift, self.width, self.offset];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidProfile {
                name,
                reason: "non-finite parameter".into(),
            });
        }
        if self.width == 0.0 {
            return Err(ProblemError::InvalidProfile {
                name,
                reason: "width must be non-zero".into(),
            });
        }
        Ok(())
    }
}

/// Linear part of one species equation: `sign * f - decay * u + source`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesTerms {
    pub diffusion: f64,
    pub sign: f64,
    pub decay: f64,
    pub source: f64,
    pub boundary: f64,
}

impl SpeciesTerms {
    /// Constant part of the load once the boundary value is factored out: `source - decay * boundary`.
    pub fn constant_load(&self) -> f64 {
        self.source - self.decay * self.boundary
    }
}

/// Immutable description of a two-species problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub lower: f64,
    pub upper: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub p: f64,
    pub q: f64,
    pub theta0: f64,
    pub gamma0: f64,
    pub reaction: ReactionForm,
    pub sign_m: f64,
    pub sign_n: f64,
    pub source_m: f64,
    pub source_n: f64,
    pub decay_m: f64,
    pub decay_n: f64,
    pub initial_m: SineProfile,
    pub initial_n: SineProfile,
}

impl ProblemSpec {
    /// Checks parameter ranges and boundary/initial compatibility.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.upper > self.lower) {
            return Err(ProblemError::InvalidDomain {
                lower: self.lower,
                upper: self.upper,
            });
        }
        for (name, value) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ProblemError::NonPositiveDiffusion { name, value });
            }
        }
        for (name, value) in [
            ("p", self.p),
            ("q", self.q),
            ("theta0", self.theta0),
            ("gamma0", self.gamma0),
            ("source_m", self.source_m),
            ("source_n", self.source_n),
            ("decay_m", self.decay_m),
            ("decay_n", self.decay_n),
        ] {
            if !value.is_finite() {
                return Err(ProblemError::NonFinite { name, value });
            }
        }
        for (name, value) in [("sign_m", self.sign_m), ("sign_n", self.sign_n)] {
            if value != 1.0 && value != -1.0 {
                return Err(ProblemError::InvalidSign { name, value });
            }
        }
        ReactionForm::new(self.reaction.exponent_m, self.reaction.exponent_n)?;
        self.initial_m.validate("initial_m")?;
        self.initial_n.validate("initial_n")?;
        for x in [self.lower, self.upper] {
            check_compatible('M', x, self.initial_m.eval(x), self.theta0)?;
            check_compatible('N', x, self.initial_n.eval(x), self.gamma0)?;
        }
        Ok(())
    }

    /// Test problem with `f = M^2 N` on `[0, 2]`: M gains `+f - (p + q) M`, N gains `-f + p (1 - N)`.
    pub fn builtin_tp1() -> Self {
        let (a, b) = (0.0, 2.0);
        let p = 0.09;
        let q = -0.004;
        let wave = |amplitude: f64, offset: f64| SineProfile {
            amplitude,
            power: 1,
            shift: b,
            width: b - a,
            offset,
        };
        Self {
            lower: a,
            upper: b,
            eps1: 0.01,
            eps2: 0.01,
            p,
            q,
            theta0: 0.0,
            gamma0: 1.0,
            reaction: ReactionForm {
                exponent_m: 2,
                exponent_n: 1,
            },
            sign_m: 1.0,
            sign_n: -1.0,
            source_m: 0.0,
            source_n: p,
            decay_m: p + q,
            decay_n: p,
            initial_m: wave(0.01, 0.0),
            initial_n: wave(-0.12, 1.0),
        }
    }

    /// One-dimensional Gray-Scott on `[-50, 50]` with `f = M N^2`.
    pub fn builtin_grayscott() -> Self {
        let p = 0.01;
        let q = 0.12;
        let spike = |amplitude: f64, offset: f64| SineProfile {
            amplitude,
            power: 100,
            shift: 50.0,
            width: 100.0,
            offset,
        };
        Self {
            lower: -50.0,
            upper: 50.0,
            eps1: 1.0,
            eps2: 0.01,
            p,
            q,
            theta0: 1.0,
            gamma0: 0.0,
            reaction: ReactionForm {
                exponent_m: 1,
                exponent_n: 2,
            },
            sign_m: -1.0,
            sign_n: 1.0,
            source_m: p,
            source_n: 0.0,
            decay_m: p,
            decay_n: p + q,
            initial_m: spike(-0.5, 1.0),
            initial_n: spike(0.25, 0.0),
        }
    }

    pub fn m_terms(&self) -> SpeciesTerms {
        SpeciesTerms {
            diffusion: self.eps1,
            sign: self.sign_m,
            decay: self.decay_m,
            source: self.source_m,
            boundary: self.theta0,
        }
    }

    pub fn n_terms(&self) -> SpeciesTerms {
        SpeciesTerms {
            diffusion: self.eps2,
            sign: self.sign_n,
            decay: self.decay_n,
            source: self.source_n,
            boundary: self.gamma0,
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Right-hand side of both equations without diffusion, `(G_M, G_N)`.
    pub fn reaction_rates(&self, m: f64, n: f64) -> (f64, f64) {
        let f = self.reaction.eval(m, n);
        (
            self.sign_m * f - self.decay_m * m + self.source_m,
            self.sign_n * f - self.decay_n * n + self.source_n,
        )
    }
}

fn check_compatible(species: char, x: f64, value: f64, expected: f64) -> Result<(), ProblemError> {
    if (value - expected).abs() > COMPATIBILITY_TOL {
        return Err(ProblemError::IncompatibleInitialData {
            species,
            x,
            value,
            expected,
        });
    }
    Ok(())
}

/// Picard linearization of `f` around a previous iterate.
///
/// In the M equation one factor of N is left implicit:
/// `f = gamma(x) + omega(x) * (N - gamma0)`; in the N equation one factor of
/// M is left implicit: `f = pi(x) + phi(x) * (M - theta0)`. When the
/// implicit exponent is zero the term is lagged entirely.
#[derive(Debug, Clone, Copy)]
pub struct PicardSplit<'a> {
    problem: &'a ProblemSpec,
    basis: &'a BasisSpec,
    prev_c: &'a [f64],
    prev_d: &'a [f64],
}

/// The four split fields at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitValues {
    pub gamma: f64,
    pub omega: f64,
    pub pi: f64,
    pub phi: f64,
}

pub fn picard_split<'a>(
    problem: &'a ProblemSpec,
    basis: &'a BasisSpec,
    prev_c: &'a [f64],
    prev_d: &'a [f64],
) -> PicardSplit<'a> {
    assert_eq!(
        prev_c.len(),
        basis.len(),
        "c has wrong length for the basis"
    );
    assert_eq!(
        prev_d.len(),
        basis.len(),
        "d has wrong length for the basis"
    );
    PicardSplit {
        problem,
        basis,
        prev_c,
        prev_d,
    }
}

impl PicardSplit<'_> {
    /// Previous-iterate fields `(M~, N~)` at `x`.
    pub fn fields(&self, x: f64) -> (f64, f64) {
        let mut m = self.problem.theta0;
        let mut n = self.problem.gamma0;
        for j in 0..self.basis.len() {
            let b = self
                .basis
                .eval(j, x)
                .expect("split evaluated inside its basis domain");
            m += self.prev_c[j] * b;
            n += self.prev_d[j] * b;
        }
        (m, n)
    }

    /// Split fields given already-evaluated iterate values.
    pub fn values_from_fields(&self, m: f64, n: f64) -> SplitValues {
        split_at(self.problem, m, n)
    }

    pub fn values(&self, x: f64) -> SplitValues {
        let (m, n) = self.fields(x);
        split_at(self.problem, m, n)
    }

    pub fn gamma(&self, x: f64) -> f64 {
        self.values(x).gamma
    }

    pub fn omega(&self, x: f64) -> f64 {
        self.values(x).omega
    }

    pub fn pi(&self, x: f64) -> f64 {
        self.values(x).pi
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.values(x).phi
    }
}

/// Split of `f` at pointwise iterate values `(m, n)`.
pub fn split_at(problem: &ProblemSpec, m: f64, n: f64) -> SplitValues {
    let alpha = problem.reaction.exponent_m as i32;
    let beta = problem.reaction.exponent_n as i32;
    let (gamma, omega) = if beta == 0 {
        (problem.reaction.eval(m, n), 0.0)
    } else {
        let omega = m.powi(alpha) * n.powi(beta - 1);
        (omega * problem.gamma0, omega)
    };
    let (pi, phi) = if alpha == 0 {
        (problem.reaction.eval(m, n), 0.0)
    } else {
        let phi = m.powi(alpha - 1) * n.powi(beta);
        (phi * problem.theta0, phi)
    };
    SplitValues {
        gamma,
        omega,
        pi,
        phi,
    }
}
