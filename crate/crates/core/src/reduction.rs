//! Reduction of the impulsive equation to `z_{n+1} = a_n z_n + b_n z_{n±k}`
//! and to the normalized form `Δy_n = Q_n y_{n±k}` with `y_n = α_n z_n`.
//!
//! `Q_n` is obtained two ways: from the stored products `α_{n+1} b_n / α_{n∓k}`
//! and directly as an impulse product times a single nested integral. The
//! build cross-checks the two at every index.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::problem::{Direction, ProblemSpec};
use crate::quad::{exponent, propagated_integral, QuadError};

/// Relative agreement demanded between the two `Q_n` routes.
pub const AUDIT_REL_TOL: f64 = 1e-8;

fn at(n: i64) -> impl Fn(QuadError) -> Error {
    move |source| Error::Quadrature { n, source }
}

/// `a_n = (1 + c_{n+1}) exp(∫_n^{n+1} a(s) ds)`.
pub fn compute_an(spec: &ProblemSpec, n: i64, tol: f64) -> Result<f64> {
    let r = spec.impulse.factor(n + 1)?;
    let t = n as f64;
    let growth = exponent(&spec.a, t, t + 1.0, tol).map_err(at(n))?;
    Ok(r * growth.exp())
}

/// `b_n = (1 + c_{n+1}) ∫_n^{n+1} exp(∫_s^{n+1} a(u) du) b(s) ds`.
pub fn compute_bn(spec: &ProblemSpec, n: i64, tol: f64) -> Result<f64> {
    let r = spec.impulse.factor(n + 1)?;
    let t = n as f64;
    let forcing = propagated_integral(&spec.a, &spec.b, t, t + 1.0, t + 1.0, tol).map_err(at(n))?;
    Ok(r * forcing)
}

/// `α_n = ∏_{j=n0}^{n-1} 1 / a_j` where `a_seq[i]` holds `a_{n0+i}`.
pub fn compute_alpha(a_seq: &[f64], n0: i64, n: i64) -> Result<f64> {
    let len = (n - n0).max(0) as usize;
    if n < n0 || len > a_seq.len() {
        return Err(Error::IndexOutOfRange {
            n,
            lo: n0,
            hi: n0 + a_seq.len() as i64,
        });
    }
    let mut alpha = 1.0;
    for (i, &a) in a_seq[..len].iter().enumerate() {
        if a == 0.0 {
            return Err(Error::ZeroCoefficient { n: n0 + i as i64 });
        }
        alpha /= a;
    }
    Ok(alpha)
}

/// `Q_n` evaluated without the α products:
///
/// delayed: `∏_{j=n-k+1}^{n} (1 + c_j)^{-1} · ∫_n^{n+1} exp(∫_s^{n-k} a) b(s) ds`
///
/// advanced: `∏_{j=n+1}^{n+k} (1 + c_j) · ∫_n^{n+1} exp(∫_s^{n+k} a) b(s) ds`
pub fn direct_qn(spec: &ProblemSpec, n: i64, tol: f64) -> Result<f64> {
    let k = spec.k_i64();
    let t = n as f64;
    let (product, upper) = match spec.direction {
        Direction::Delayed => {
            let mut p = 1.0;
            for j in n - k + 1..=n {
                p /= spec.impulse.factor(j)?;
            }
            (p, (n - k) as f64)
        }
        Direction::Advanced => {
            let mut p = 1.0;
            for j in n + 1..=n + k {
                p *= spec.impulse.factor(j)?;
            }
            (p, (n + k) as f64)
        }
    };
    let integral = propagated_integral(&spec.a, &spec.b, t, t + 1.0, upper, tol).map_err(at(n))?;
    Ok(product * integral)
}

/// Coefficient sequences of the reduced difference equation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub direction: Direction,
    pub k: usize,
    pub n0: i64,
    /// `a_n` for `n0 <= n < horizon`.
    pub a_seq: Vec<f64>,
    /// `b_n` for `n0 <= n < horizon`.
    pub b_seq: Vec<f64>,
    /// `α_n` for `n0 <= n <= horizon`.
    pub alpha_seq: Vec<f64>,
    /// First index with a stored `Q_n`.
    pub q_lo: i64,
    /// Signed `Q_n` for `q_lo <= n <= q_hi()`.
    pub q_seq: Vec<f64>,
    /// Largest relative disagreement seen between the two `Q_n` routes, when
    /// the system was built from a problem.
    pub audit_max_rel: Option<f64>,
    /// `Q_n` from [`direct_qn`], aligned with `q_seq`; empty unless the system
    /// was built from a problem.
    pub q_direct_seq: Vec<f64>,
}

impl DiscreteSystem {
    /// Builds α and `Q` from given `a_n`, `b_n` starting at `n0`.
    pub fn from_coefficients(
        direction: Direction,
        k: usize,
        n0: i64,
        a_seq: Vec<f64>,
        b_seq: Vec<f64>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        if a_seq.len() != b_seq.len() {
            return Err(Error::InvalidSpec("a_seq and b_seq differ in length".into()));
        }
        if a_seq.len() <= k {
            return Err(Error::TooShort {
                len: a_seq.len(),
                needed: k + 1,
            });
        }
        let mut alpha_seq = Vec::with_capacity(a_seq.len() + 1);
        alpha_seq.push(1.0);
        for (i, &a) in a_seq.iter().enumerate() {
            if a == 0.0 {
                return Err(Error::ZeroCoefficient { n: n0 + i as i64 });
            }
            let next = alpha_seq[i] / a;
            alpha_seq.push(next);
        }
        let mut ds = DiscreteSystem {
            direction,
            k,
            n0,
            a_seq,
            b_seq,
            alpha_seq,
            q_lo: 0,
            q_seq: Vec::new(),
            audit_max_rel: None,
            q_direct_seq: Vec::new(),
        };
        let (lo, hi) = ds.q_bounds();
        ds.q_seq = (lo..=hi).map(|n| ds.alpha_ratio_q(n)).collect();
        ds.q_lo = lo;
        Ok(ds)
    }

    pub fn horizon(&self) -> i64 {
        self.n0 + self.a_seq.len() as i64
    }

    /// Inclusive range of indices where `Q_n` is defined.
    fn q_bounds(&self) -> (i64, i64) {
        let k = self.k as i64;
        match self.direction {
            Direction::Delayed => (self.n0 + k, self.horizon() - 1),
            Direction::Advanced => (self.n0, self.horizon() - k),
        }
    }

    pub fn q_hi(&self) -> i64 {
        self.q_lo + self.q_seq.len() as i64 - 1
    }

    fn coeff_index(&self, n: i64) -> Result<usize> {
        if n < self.n0 || n >= self.horizon() {
            return Err(Error::IndexOutOfRange {
                n,
                lo: self.n0,
                hi: self.horizon() - 1,
            });
        }
        Ok((n - self.n0) as usize)
    }

    pub fn a(&self, n: i64) -> Result<f64> {
        Ok(self.a_seq[self.coeff_index(n)?])
    }

    pub fn b(&self, n: i64) -> Result<f64> {
        Ok(self.b_seq[self.coeff_index(n)?])
    }

    pub fn alpha(&self, n: i64) -> Result<f64> {
        if n < self.n0 || n > self.horizon() {
            return Err(Error::IndexOutOfRange {
                n,
                lo: self.n0,
                hi: self.horizon(),
            });
        }
        Ok(self.alpha_seq[(n - self.n0) as usize])
    }

    fn alpha_ratio_q(&self, n: i64) -> f64 {
        let k = self.k as i64;
        let i = (n - self.n0) as usize;
        let other = match self.direction {
            Direction::Delayed => n - k,
            Direction::Advanced => n + k,
        };
        self.alpha_seq[i + 1] * self.b_seq[i] / self.alpha_seq[(other - self.n0) as usize]
    }

    /// Signed `Q_n = α_{n+1} b_n / α_{n∓k}`.
    pub fn q(&self, n: i64) -> Result<f64> {
        if n < self.q_lo || n > self.q_hi() {
            return Err(Error::IndexOutOfRange {
                n,
                lo: self.q_lo,
                hi: self.q_hi(),
            });
        }
        Ok(self.q_seq[(n - self.q_lo) as usize])
    }

    /// `Q*_n = -Q_n`.
    pub fn q_star(&self, n: i64) -> Result<f64> {
        self.q(n).map(|q| -q)
    }

    /// `(n, Q_n)` pairs over the stored range.
    pub fn q_iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.q_seq.iter().enumerate().map(|(i, &q)| (self.q_lo + i as i64, q))
    }
}

/// Free-function form of [`DiscreteSystem::q`].
pub fn compute_qn(ds: &DiscreteSystem, n: i64) -> Result<f64> {
    ds.q(n)
}

/// Builds the discrete system using the default execution mode.
pub fn build_discrete_system(spec: &ProblemSpec, tol: f64) -> Result<DiscreteSystem> {
    build_discrete_system_with(spec, tol, Exec::default())
}

/// Builds `a_n`, `b_n`, α and `Q_n` over `[n0, horizon)` and audits every
/// `Q_n` against [`direct_qn`]. A disagreement beyond [`AUDIT_REL_TOL`] (plus
/// a quadrature noise allowance proportional to `tol`) aborts the build.
pub fn build_discrete_system_with(spec: &ProblemSpec, tol: f64, exec: Exec) -> Result<DiscreteSystem> {
    spec.validate()?;
    let coeffs: Vec<(f64, f64)> = exec
        .map_range(spec.n0, spec.horizon, |n| {
            Ok((compute_an(spec, n, tol)?, compute_bn(spec, n, tol)?))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let (a_seq, b_seq): (Vec<f64>, Vec<f64>) = coeffs.into_iter().unzip();
    let mut ds = DiscreteSystem::from_coefficients(spec.direction, spec.k, spec.n0, a_seq, b_seq)?;

    let direct: Vec<f64> = exec
        .map_range(ds.q_lo, ds.q_hi() + 1, |n| direct_qn(spec, n, tol))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for ((n, q_alpha), &q_direct) in ds.q_iter().zip(&direct) {
        let diff = (q_alpha - q_direct).abs();
        let scale = q_alpha.abs().max(q_direct.abs());
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
        // Both routes carry absolute quadrature error of order tol, scaled by
        // the α ratio that turns b_n into Q_n.
        let b = ds.b(n)?;
        let ratio = if b != 0.0 { (q_alpha / b).abs() } else { 1.0 };
        let noise = 100.0 * tol * ratio.max(1.0);
        if !q_alpha.is_finite() || !q_direct.is_finite() || diff > AUDIT_REL_TOL * scale + noise {
            return Err(Error::DiagnosticMismatch {
                n,
                alpha_route: q_alpha,
                direct_route: q_direct,
            });
        }
    }
    ds.audit_max_rel = Some(worst);
    ds.q_direct_seq = direct;
    Ok(ds)
}
