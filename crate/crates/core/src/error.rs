use thiserror::Error;

use crate::expr::ParseError;
use crate::quad::QuadError;
use crate::Direction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field}: {source}")]
    Parse {
        field: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("impulse factor 1 + c_n is zero at n = {n}")]
    ZeroImpulseFactor { n: i64 },
    #[error("impulse factor 1 + c_n is not finite at n = {n}")]
    NonFiniteImpulseFactor { n: i64 },
    #[error("quadrature failed at n = {n}: {source}")]
    Quadrature {
        n: i64,
        #[source]
        source: QuadError,
    },
    #[error("coefficient a_n is zero at n = {n}")]
    ZeroCoefficient { n: i64 },
    #[error("index {n} outside the computed range [{lo}, {hi}]")]
    IndexOutOfRange { n: i64, lo: i64, hi: i64 },
    #[error("Q_n routes disagree at n = {n}: alpha ratio {alpha_route:e} vs direct {direct_route:e}")]
    DiagnosticMismatch {
        n: i64,
        alpha_route: f64,
        direct_route: f64,
    },
    #[error("b_n = 0 at n = {n}; the advanced recursion cannot be continued")]
    DivisionByZero { n: i64 },
    #[error("b_n = 1 at n = {n}; the k = 1 advanced recursion is degenerate")]
    DegenerateAdvance { n: i64 },
    #[error("criterion {criterion} requires a {expected:?} equation")]
    WrongDirection {
        criterion: &'static str,
        expected: Direction,
    },
    #[error("advanced criteria need an advance of at least 2, got {0}")]
    AdvanceTooSmall(usize),
    #[error("sequence too short: {len} points, need {needed}")]
    TooShort { len: usize, needed: usize },
}

impl Error {
    /// Problems with the input itself, as opposed to failures of the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidSpec(_)
                | Error::ZeroImpulseFactor { .. }
                | Error::NonFiniteImpulseFactor { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
