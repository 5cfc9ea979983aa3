//! Flat JSON description of a user-defined problem.

use serde::{Deserialize, Serialize};

use rdgalerkin::problem::{ProblemSpec, ReactionForm, SineProfile};

use crate::CliError;

/// Mirrors [`ProblemSpec`] with the reaction exponents inlined as `alpha` and `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub lower: f64,
    pub upper: f64,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    pub theta0: f64,
    pub gamma0: f64,
    pub alpha: u32,
    pub beta: u32,
    pub sign_m: f64,
    pub sign_n: f64,
    #[serde(default)]
    pub source_m: f64,
    #[serde(default)]
    pub source_n: f64,
    #[serde(default)]
    pub decay_m: f64,
    #[serde(default)]
    pub decay_n: f64,
    pub initial_m: SineProfile,
    pub initial_n: SineProfile,
}

impl CustomProblem {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Json {
            what: "custom problem",
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    /// Validated problem specification.
    pub fn to_spec(&self) -> Result<ProblemSpec, CliError> {
        let reaction = ReactionForm::new(self.alpha, self.beta).map_err(CliError::Problem)?;
        let spec = ProblemSpec {
            lower: self.lower,
            upper: self.upper,
            eps1: self.eps1,
            eps2: self.eps2,
            p: self.p,
            q: self.q,
            theta0: self.theta0,
            gamma0: self.gamma0,
            reaction,
            sign_m: self.sign_m,
            sign_n: self.sign_n,
            source_m: self.source_m,
            source_n: self.source_n,
            decay_m: self.decay_m,
            decay_n: self.decay_n,
            initial_m: self.initial_m,
            initial_n: self.initial_n,
        };
        spec.validate().map_err(CliError::Problem)?;
        Ok(spec)
    }
}

impl From<&ProblemSpec> for CustomProblem {
    fn from(s: &ProblemSpec) -> Self {
        Self {
            lower: s.lower,
            upper: s.upper,
            eps1: s.eps1,
            eps2: s.eps2,
            p: s.p,
            q: s.q,
            theta0: s.theta0,
            gamma0: s.gamma0,
            alpha: s.reaction.exponent_m,
            beta: s.reaction.exponent_n,
            sign_m: s.sign_m,
            sign_n: s.sign_n,
            source_m: s.source_m,
            source_n: s.source_n,
            decay_m: s.decay_m,
            decay_n: s.decay_n,
            initial_m: s.initial_m,
            initial_n: s.initial_n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip() {
        for spec in [ProblemSpec::builtin_tp1(), ProblemSpec::builtin_grayscott()] {
            let json = CustomProblem::from(&spec).to_json();
            let back = CustomProblem::from_json(&json).unwrap().to_spec().unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut v: serde_json::Value =
            serde_json::from_str(&CustomProblem::from(&ProblemSpec::builtin_tp1()).to_json())
                .unwrap();
        v["kappa"] = 1.0.into();
        assert!(matches!(
            CustomProblem::from_json(&v.to_string()),
            Err(CliError::Json { .. })
        ));
        v.as_object_mut().unwrap().remove("kappa");
        v["eps1"] = (-1.0).into();
        let err = CustomProblem::from_json(&v.to_string())
            .unwrap()
            .to_spec()
            .unwrap_err();
        assert!(err.to_string().contains("eps1"), "{err}");
        v["eps1"] = 0.01.into();
        v["alpha"] = 1.into();
        v["beta"] = 0.into();
        assert!(matches!(
            CustomProblem::from_json(&v.to_string()).unwrap().to_spec(),
            Err(CliError::Problem(_))
        ));
    }
}
