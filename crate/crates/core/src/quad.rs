//! Adaptive Simpson quadrature.
//!
//! Panels are bisected until `|S_fine - S_coarse| <= 15 * tol_local`, with the
//! local tolerance halved on each split, and accepted panels get the usual
//! Richardson correction. The local target is the smaller of the absolute
//! tolerance and [`REL_TOL`] times the panel's magnitude `∫|f|`, so tiny
//! integrands keep their relative accuracy. Integrands whose magnitude makes
//! the absolute target unreachable in double precision are accepted once the
//! difference drops to roundoff level relative to the panel.

use thiserror::Error;

use crate::expr::Expr;

/// Default absolute tolerance for every integral in the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Longest initial panel; longer intervals start from equal panels no wider
/// than this so that a periodic integrand cannot alias the first estimate.
pub const MAX_PANEL: f64 = 1.0;

/// Relative accuracy demanded of every panel, measured against `∫|f|`.
pub const REL_TOL: f64 = 1e-10;

/// Deepest bisection level before giving up.
pub const MAX_DEPTH: u32 = 60;

const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute error estimate, summed over accepted panels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand is not finite at s = {at}")]
    SingularIntegrand { at: f64 },
    #[error("no convergence on [{lo}, {hi}] within {MAX_DEPTH} bisections")]
    NoConvergence { lo: f64, hi: f64 },
    #[error("invalid integration bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
}

struct Simpson<'f, F> {
    f: &'f F,
    evaluations: usize,
    error: f64,
    /// Relative noise level of `f`; differences below it times the panel
    /// magnitude are accepted.
    noise: f64,
}

impl<F> Simpson<'_, F>
where
    F: Fn(f64) -> Result<f64, QuadError>,
{
    fn sample(&mut self, x: f64) -> Result<f64, QuadError> {
        self.evaluations += 1;
        let y = (self.f)(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::SingularIntegrand { at: x })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, QuadError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.sample(lm)?;
        let frm = self.sample(rm)?;
        let h = b - a;
        let left = h * (fa + 4.0 * flm + fm) / 12.0;
        let right = h * (fm + 4.0 * frm + fb) / 12.0;
        let delta = left + right - whole;
        let magnitude = h * (fa.abs() + 4.0 * flm.abs() + 2.0 * fm.abs() + 4.0 * frm.abs() + fb.abs()) / 12.0;
        let target = tol.min(REL_TOL * magnitude);
        if delta.abs() <= 15.0 * target || delta.abs() <= self.noise * magnitude {
            self.error += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH || lm <= a || rm >= b {
            return Err(QuadError::NoConvergence { lo: a, hi: b });
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Integrates a fallible integrand. Errors raised by `f` propagate unchanged,
/// which lets nested integrals report the inner failure.
pub fn try_integrate<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Result<f64, QuadError>,
{
    integrate_noisy(f, lo, hi, tol, ROUNDOFF_FLOOR)
}

fn integrate_noisy<F>(f: F, lo: f64, hi: f64, tol: f64, noise: f64) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> Result<f64, QuadError>,
{
    if !lo.is_finite() || !hi.is_finite() {
        return Err(QuadError::InvalidBounds { lo, hi });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance(tol));
    }
    if lo > hi {
        let r = integrate_noisy(f, hi, lo, tol, noise)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let mut s = Simpson {
        f: &f,
        evaluations: 0,
        error: 0.0,
        noise: noise.max(ROUNDOFF_FLOOR),
    };
    if lo == hi {
        s.sample(lo)?;
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: s.evaluations,
        });
    }
    let panels = ((hi - lo) / MAX_PANEL).ceil().max(1.0);
    let width = (hi - lo) / panels;
    let panels = panels as usize;
    let panel_tol = tol / panels as f64;
    let mut value = 0.0;
    let mut a = lo;
    let mut fa = s.sample(lo)?;
    for i in 1..=panels {
        let b = if i == panels { hi } else { lo + i as f64 * width };
        let fm = s.sample(0.5 * (a + b))?;
        let fb = s.sample(b)?;
        let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
        value += s.refine(a, b, fa, fm, fb, whole, panel_tol, 0)?;
        a = b;
        fa = fb;
    }
    Ok(QuadResult {
        value,
        error_estimate: s.error,
        evaluations: s.evaluations,
    })
}

/// Signed integral of `f` from `lo` to `hi`; `lo > hi` flips the sign.
pub fn integrate<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), lo, hi, tol)
}

/// `A(s, t) = ∫_s^t a(u) du`, the exponent of the fundamental solution
/// `exp(A(s, t))` of `x' = a(t) x`.
pub fn exponent(a: &Expr, s: f64, t: f64, tol: f64) -> Result<f64, QuadError> {
    integrate(|u| a.eval(u), s, t, tol).map(|r| r.value)
}

/// `∫_lo^hi exp(A(s, upper)) b(s) ds`, the forcing term of the variation of
/// parameters formula. Inner integrals run at `tol / 10`; their error makes the
/// outer integrand noisy at that relative level, which bounds what the outer
/// refinement can resolve.
pub fn propagated_integral(a: &Expr, b: &Expr, lo: f64, hi: f64, upper: f64, tol: f64) -> Result<f64, QuadError> {
    if b.is_constant() && b.eval(lo) == 0.0 {
        return Ok(0.0);
    }
    let inner_tol = tol / 10.0;
    integrate_noisy(
        |s| {
            let bs = b.eval(s);
            if !bs.is_finite() {
                return Err(QuadError::SingularIntegrand { at: s });
            }
            Ok(exponent(a, s, upper, inner_tol)?.exp() * bs)
        },
        lo,
        hi,
        tol,
        10.0 * inner_tol,
    )
    .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    const TOL: f64 = 1e-10;

    #[test]
    fn closed_forms() {
        let one = integrate(|_| 1.0, 0.0, 1.0, TOL).unwrap();
        assert_eq!(one.value, 1.0);
        assert!(one.evaluations >= 1);

        let e = integrate(f64::exp, 0.0, 1.0, TOL).unwrap();
        assert!((e.value - (std::f64::consts::E - 1.0)).abs() <= 1e-10);

        let ln2 = integrate(|s| 1.0 / s, 1.0, 2.0, TOL).unwrap();
        assert!((ln2.value - std::f64::consts::LN_2).abs() <= 1e-10);
        assert!(ln2.error_estimate >= 0.0);
    }

    #[test]
    fn orientation() {
        assert_eq!(integrate(|_| 1.0, 1.0, 0.0, TOL).unwrap().value, -1.0);
        let f = |s: f64| (3.0 * s).sin() + s * s;
        let fwd = integrate(f, -0.3, 2.2, TOL).unwrap().value;
        let bwd = integrate(f, 2.2, -0.3, TOL).unwrap().value;
        assert_eq!(fwd.to_bits(), (-bwd).to_bits());
    }

    #[test]
    fn cubic_needs_a_single_refinement() {
        // Simpson is exact on cubics, so the first comparison accepts.
        let r = integrate(|s| 4.0 * s * s * s - s + 2.0, 0.0, 1.0, TOL).unwrap();
        assert!((r.value - 2.5).abs() < 1e-12);
        assert_eq!(r.evaluations, 5);
        // one unit panel each, sharing endpoints
        let r = integrate(|s| 4.0 * s * s * s - s + 2.0, 0.0, 2.0, TOL).unwrap();
        assert!((r.value - 18.0).abs() < 1e-12);
        assert_eq!(r.evaluations, 9);
    }

    #[test]
    fn periodic_integrand_does_not_alias() {
        // the five coarse abscissae of [0, 8π] all sit where cos = 1
        let hi = 8.0 * std::f64::consts::PI;
        let r = integrate(f64::cos, 0.0, hi, TOL).unwrap();
        assert!(r.value.abs() < 1e-10, "{}", r.value);
        let r = integrate(f64::cos, 0.0, 25.125, TOL).unwrap();
        assert!((r.value - 25.125f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        let r = integrate(|s| s, 3.0, 3.0, TOL).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn singular_integrand_reports_abscissa() {
        let err = integrate(|s| 1.0 / s, 0.0, 1.0, TOL).unwrap_err();
        assert_eq!(err, QuadError::SingularIntegrand { at: 0.0 });
    }

    #[test]
    fn no_convergence_on_wild_integrand() {
        let err = integrate(|s| if s > 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-300).unwrap_err();
        assert!(matches!(err, QuadError::NoConvergence { .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            integrate(|s| s, 0.0, f64::INFINITY, TOL),
            Err(QuadError::InvalidBounds { .. })
        ));
        assert!(matches!(
            integrate(|s| s, 0.0, 1.0, 0.0),
            Err(QuadError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn large_magnitude_integrand_converges() {
        let r = integrate(|s| 1e15 * s.exp(), 0.0, 1.0, TOL).unwrap();
        let exact = 1e15 * (std::f64::consts::E - 1.0);
        assert!(((r.value - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn additivity() {
        let f = |s: f64| (-s * s).exp() * (1.0 + s);
        let ac = integrate(f, 0.0, 3.0, TOL).unwrap().value;
        let ab = integrate(f, 0.0, 1.3, TOL).unwrap().value;
        let bc = integrate(f, 1.3, 3.0, TOL).unwrap().value;
        assert!((ac - (ab + bc)).abs() <= 3.0 * TOL);
    }

    #[test]
    fn exponent_examples() {
        let minus_one = parse("-1", "t").unwrap();
        assert_eq!(exponent(&minus_one, 4.0, 5.0, TOL).unwrap(), -1.0);
        let inv = parse("1/t", "t").unwrap();
        let v = exponent(&inv, 1.0, 2.0, TOL).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-10);
        let v = exponent(&inv, 7.0, 8.0, TOL).unwrap();
        assert!((v - (8.0f64 / 7.0).ln()).abs() < 1e-10);
        let zero = parse("0", "t").unwrap();
        assert_eq!(exponent(&zero, 2.0, 9.5, TOL).unwrap(), 0.0);
    }

    #[test]
    fn nested_integral_matches_closed_form() {
        // a = 1, b = 1: ∫_0^1 e^{1-s} ds = e - 1
        let a = parse("1", "t").unwrap();
        let b = parse("1", "t").unwrap();
        let v = propagated_integral(&a, &b, 0.0, 1.0, 1.0, TOL).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn nested_integral_with_large_noisy_integrand_converges() {
        // |integrand| ~ 5e4 and b changes sign inside the panel
        let a = parse(
            "-1.9980493047879566 - 1.1609173380892857 * exp(1.5937023117275704 * t / 60)",
            "t",
        )
        .unwrap();
        let b = parse(
            "-1.1120579436670297 + 0.8357321399589286 * exp(1.8766496871626925 * t / 60)",
            "t",
        )
        .unwrap();
        let v = propagated_integral(&a, &b, 9.0, 10.0, 4.0, TOL).unwrap();
        let reference = integrate(
            |s| exponent(&a, s, 4.0, 1e-13).unwrap().exp() * b.eval(s),
            9.0,
            10.0,
            1e-6,
        )
        .unwrap()
        .value;
        assert!(((v - reference) / reference).abs() < 1e-9, "{v} vs {reference}");
    }

    #[test]
    fn nested_integral_propagates_inner_singularity() {
        let a = parse("1/t", "t").unwrap();
        let b = parse("1", "t").unwrap();
        let err = propagated_integral(&a, &b, 0.0, 1.0, 1.0, TOL).unwrap_err();
        assert!(matches!(err, QuadError::SingularIntegrand { .. }));
    }
}
