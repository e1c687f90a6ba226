//! JSON problem files.
//!
//! ```json
//! {
//!   "a": "-1", "b": "-1/3", "direction": "delayed", "k": 3,
//!   "impulse": {"factor": 0.5},
//!   "initial_window": [1, 1, 1, 1], "n0": 0, "horizon": 60
//! }
//! ```
//!
//! `impulse` is `"none"`, `{"factor": r}`, `{"formula": "<expr in n>"}` or
//! `{"table": [r, ...], "default": r}`. `tol` defaults to `1e-10` and
//! `tail_fraction` to `0.5`. Unknown keys are rejected.

use std::path::Path;

use idepca_core::expr::parse;
use idepca_core::{Direction, Error as CoreError, ImpulseSpec, ProblemSpec};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoImpulse {
    None,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ImpulseField {
    None(NoImpulse),
    Factor(FactorField),
    Formula(FormulaField),
    Table(TableField),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorField {
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaField {
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableField {
    pub table: Vec<f64>,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub a: String,
    pub b: String,
    pub direction: Direction,
    pub k: usize,
    pub impulse: ImpulseField,
    pub initial_window: Vec<f64>,
    pub n0: i64,
    pub horizon: i64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_FRACTION
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub tail_fraction: Option<f64>,
    pub horizon: Option<i64>,
}

/// A validated problem ready for computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub tol: f64,
    pub tail_fraction: f64,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("problem file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn into_problem(self, overrides: Overrides) -> Result<Problem, CliError> {
        let parse_field = |field: &'static str, text: &str, var: &str| {
            parse(text, var).map_err(|source| CoreError::Parse { field, source })
        };
        let a = parse_field("a", &self.a, "t")?;
        let b = parse_field("b", &self.b, "t")?;
        let impulse = match self.impulse {
            ImpulseField::None(_) => ImpulseSpec::None,
            ImpulseField::Factor(f) => ImpulseSpec::ConstantFactor(f.factor),
            ImpulseField::Formula(f) => ImpulseSpec::Formula(parse_field("impulse.formula", &f.formula, "n")?),
            ImpulseField::Table(t) => ImpulseSpec::Table {
                factors: t.table,
                default: t.default,
            },
        };
        let tol = overrides.tol.unwrap_or(self.tol);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::input(format!("tol must be positive and finite, got {tol}")));
        }
        let tail_fraction = overrides.tail_fraction.unwrap_or(self.tail_fraction);
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(CliError::input(format!(
                "tail_fraction must be in (0, 1], got {tail_fraction}"
            )));
        }
        let spec = ProblemSpec::new(
            a,
            b,
            self.direction,
            self.k,
            impulse,
            self.initial_window,
            self.n0,
            overrides.horizon.unwrap_or(self.horizon),
        );
        let spec = ProblemSpec {
            t_start: spec.n0 as f64,
            ..spec
        };
        spec.validate()?;
        Ok(Problem {
            spec,
            tol,
            tail_fraction,
        })
    }
}

pub fn load_problem(path: &Path, overrides: Overrides) -> Result<Problem, CliError> {
    ProblemFile::load(path)?.into_problem(overrides)
}
