use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Whether the piecewise constant argument lags (`[t - k]`) or leads (`[t + k]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Delayed,
    Advanced,
}

/// Jump factors `1 + c_n` applied at the integer nodes, `z(n) = (1 + c_n) z(n⁻)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ImpulseSpec {
    /// No impulses: every factor is 1.
    None,
    ConstantFactor(f64),
    /// Factor as an expression in `n`.
    Formula(Expr),
    /// `factors[i]` is the factor at node `n = i`; other nodes use `default`.
    Table {
        factors: Vec<f64>,
        default: f64,
    },
}

impl ImpulseSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, ImpulseSpec::None)
    }

    /// Raw factor at node `n`, without validation.
    pub fn raw_factor(&self, n: i64) -> f64 {
        match self {
            ImpulseSpec::None => 1.0,
            ImpulseSpec::ConstantFactor(r) => *r,
            ImpulseSpec::Formula(e) => e.eval(n as f64),
            ImpulseSpec::Table { factors, default } => usize::try_from(n)
                .ok()
                .and_then(|i| factors.get(i).copied())
                .unwrap_or(*default),
        }
    }

    /// Factor `1 + c_n` at node `n`; must be finite and nonzero.
    pub fn factor(&self, n: i64) -> Result<f64> {
        let r = self.raw_factor(n);
        if !r.is_finite() {
            Err(Error::NonFiniteImpulseFactor { n })
        } else if r == 0.0 {
            Err(Error::ZeroImpulseFactor { n })
        } else {
            Ok(r)
        }
    }
}

/// One scalar linear IDEPCA instance
/// `z'(t) = a(t) z(t) + b(t) z([t ± k])`, `z(n) = (1 + c_n) z(n⁻)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: Expr,
    pub b: Expr,
    pub direction: Direction,
    pub k: usize,
    pub impulse: ImpulseSpec,
    /// `z` at `n0-k..=n0` (delayed) or `n0..=n0+k` (advanced).
    pub initial_window: Vec<f64>,
    pub n0: i64,
    /// Coefficients are built for `n0 <= n < horizon`.
    pub horizon: i64,
    /// Lower end of the time domain; must not exceed `n0`.
    pub t_start: f64,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: Expr,
        b: Expr,
        direction: Direction,
        k: usize,
        impulse: ImpulseSpec,
        initial_window: Vec<f64>,
        n0: i64,
        horizon: i64,
    ) -> Self {
        ProblemSpec {
            a,
            b,
            direction,
            k,
            impulse,
            initial_window,
            n0,
            horizon,
            t_start: 0.0,
        }
    }

    pub fn k_i64(&self) -> i64 {
        self.k as i64
    }

    /// Checks the structural invariants and every impulse factor the
    /// construction will touch (nodes `n0+1..=horizon`).
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        if self.initial_window.len() != self.k + 1 {
            return Err(Error::InvalidSpec(format!(
                "initial_window needs k + 1 = {} entries, got {}",
                self.k + 1,
                self.initial_window.len()
            )));
        }
        if let Some(i) = self.initial_window.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("initial_window[{i}] is not finite")));
        }
        if self.horizon <= self.n0 + self.k_i64() {
            return Err(Error::InvalidSpec(format!(
                "horizon {} must exceed n0 + k = {}",
                self.horizon,
                self.n0 + self.k_i64()
            )));
        }
        if !self.t_start.is_finite() || (self.n0 as f64) < self.t_start {
            return Err(Error::InvalidSpec(format!(
                "n0 = {} lies before t_start = {}",
                self.n0, self.t_start
            )));
        }
        for n in self.n0 + 1..=self.horizon {
            self.impulse.factor(n)?;
        }
        Ok(())
    }

    /// Lowest index carried by the discrete solution.
    pub fn first_index(&self) -> i64 {
        match self.direction {
            Direction::Delayed => self.n0 - self.k_i64(),
            Direction::Advanced => self.n0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn spec() -> ProblemSpec {
        ProblemSpec::new(
            parse("-1", "t").unwrap(),
            parse("-1/3", "t").unwrap(),
            Direction::Delayed,
            3,
            ImpulseSpec::ConstantFactor(0.5),
            vec![1.0; 4],
            0,
            20,
        )
    }

    #[test]
    fn valid_spec_passes() {
        spec().validate().unwrap();
    }

    #[test]
    fn structural_errors() {
        let mut s = spec();
        s.k = 0;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        let mut s = spec();
        s.initial_window.pop();
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        let mut s = spec();
        s.horizon = 3;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        let mut s = spec();
        s.t_start = 0.5;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn zero_factor_in_table_is_rejected() {
        let mut s = spec();
        s.impulse = ImpulseSpec::Table {
            factors: vec![1.0, 0.5, 0.0],
            default: 1.0,
        };
        assert_eq!(s.validate(), Err(Error::ZeroImpulseFactor { n: 2 }));
    }

    #[test]
    fn factor_sources() {
        assert_eq!(ImpulseSpec::None.factor(7).unwrap(), 1.0);
        let f = ImpulseSpec::Formula(parse("1 + 1/n", "n").unwrap());
        assert_eq!(f.factor(4).unwrap(), 1.25);
        assert_eq!(f.factor(0), Err(Error::NonFiniteImpulseFactor { n: 0 }));
        let t = ImpulseSpec::Table {
            factors: vec![2.0, 3.0],
            default: 0.5,
        };
        assert_eq!(t.factor(1).unwrap(), 3.0);
        assert_eq!(t.factor(2).unwrap(), 0.5);
        assert_eq!(t.factor(-1).unwrap(), 0.5);
    }
}
