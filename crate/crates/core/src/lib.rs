//! Oscillation analysis for impulsive differential equations with a
//! piecewise-constant argument `[t ± k]`.
//!
//! A problem is reduced to a difference equation on the integer nodes, the
//! difference equation is rewritten in a form without the leading
//! coefficient, and classical discrete oscillation criteria are applied to
//! that form. The continuous solution can be rebuilt from the discrete one.

pub mod audit;
pub mod battery;
pub mod criteria;
pub mod diffeq;
pub mod error;
pub mod exec;
pub mod expr;
pub mod problem;
pub mod quad;
pub mod reduction;
pub mod trajectory;

pub use criteria::{analyze, Analysis, CriterionId, CriterionReport, CriterionVerdict, OverallVerdict};
pub use diffeq::{solve, DiscreteSolution, SignVerdict};
pub use error::{Error, Result};
pub use exec::Exec;
pub use expr::{parse, Expr};
pub use problem::{Direction, ImpulseSpec, ProblemSpec};
pub use reduction::{build_discrete_system, build_discrete_system_with, DiscreteSystem};
pub use trajectory::{reconstruct, reconstruct_with, Trajectory};
