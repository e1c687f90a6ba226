//! Solving `z_{n+1} = a_n z_n + b_n z_{n±k}` and the empirical discrete
//! oscillation test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::Direction;
use crate::reduction::DiscreteSystem;

/// Values `z_n` for `n_lo <= n <= n_hi()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    pub n_lo: i64,
    pub values: Vec<f64>,
    pub direction: Direction,
    pub k: usize,
    /// First index whose value overflowed; the recursion stopped there.
    pub overflow_at: Option<i64>,
}

impl DiscreteSolution {
    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.values.len() as i64 - 1
    }

    pub fn z(&self, n: i64) -> Option<f64> {
        if n < self.n_lo {
            return None;
        }
        self.values.get((n - self.n_lo) as usize).copied()
    }
}

fn check_init(ds: &DiscreteSystem, init: &[f64]) -> Result<()> {
    if init.len() != ds.k + 1 {
        return Err(Error::InvalidSpec(format!(
            "initial window needs k + 1 = {} entries, got {}",
            ds.k + 1,
            init.len()
        )));
    }
    Ok(())
}

/// Forward recursion `z_{n+1} = a_n z_n + b_n z_{n-k}` from `z_{n0-k..=n0}`.
pub fn solve_delayed(ds: &DiscreteSystem, init: &[f64]) -> Result<DiscreteSolution> {
    if ds.direction != Direction::Delayed {
        return Err(Error::InvalidSpec("solve_delayed needs a delayed system".into()));
    }
    check_init(ds, init)?;
    let k = ds.k;
    let mut values = init.to_vec();
    let mut overflow_at = None;
    for (i, (&a, &b)) in ds.a_seq.iter().zip(&ds.b_seq).enumerate() {
        // values[i + k] is z_n, values[i] is z_{n-k}
        let next = a * values[i + k] + b * values[i];
        if !next.is_finite() {
            overflow_at = Some(ds.n0 + i as i64 + 1);
            break;
        }
        values.push(next);
    }
    Ok(DiscreteSolution {
        n_lo: ds.n0 - k as i64,
        values,
        direction: Direction::Delayed,
        k,
        overflow_at,
    })
}

/// Continuation of `z_{n+1} = a_n z_n + b_n z_{n+k}` from the window
/// `z_{n0..=n0+k}`. For `k >= 2` the equation at index `n` is solved for
/// `z_{n+k} = (z_{n+1} - a_n z_n) / b_n`; for `k = 1` it is solved for
/// `z_{n+1} = a_n z_n / (1 - b_n)`. The equation at `n0` involves only window
/// entries and is not imposed; continuation starts at `n0 + 1` and runs while
/// `n + k <= horizon`.
pub fn solve_advanced(ds: &DiscreteSystem, init: &[f64]) -> Result<DiscreteSolution> {
    if ds.direction != Direction::Advanced {
        return Err(Error::InvalidSpec("solve_advanced needs an advanced system".into()));
    }
    check_init(ds, init)?;
    let k = ds.k;
    let mut values = init.to_vec();
    let mut overflow_at = None;
    for n in ds.n0 + 1..=ds.horizon() - k as i64 {
        let i = (n - ds.n0) as usize;
        let (a, b) = (ds.a_seq[i], ds.b_seq[i]);
        let next = if k == 1 {
            if b == 1.0 {
                return Err(Error::DegenerateAdvance { n });
            }
            a * values[i] / (1.0 - b)
        } else {
            if b == 0.0 {
                return Err(Error::DivisionByZero { n });
            }
            (values[i + 1] - a * values[i]) / b
        };
        if !next.is_finite() {
            overflow_at = Some(n + k as i64);
            break;
        }
        values.push(next);
    }
    Ok(DiscreteSolution {
        n_lo: ds.n0,
        values,
        direction: Direction::Advanced,
        k,
        overflow_at,
    })
}

pub fn solve(ds: &DiscreteSystem, init: &[f64]) -> Result<DiscreteSolution> {
    match ds.direction {
        Direction::Delayed => solve_delayed(ds, init),
        Direction::Advanced => solve_advanced(ds, init),
    }
}

/// Indices `n` at which the recursion is imposed on `sol`.
pub fn recursion_indices(ds: &DiscreteSystem, sol: &DiscreteSolution) -> std::ops::RangeInclusive<i64> {
    let k = ds.k as i64;
    match ds.direction {
        Direction::Delayed => ds.n0..=(sol.n_hi() - 1).min(ds.horizon() - 1),
        Direction::Advanced => ds.n0 + 1..=(sol.n_hi() - k).min(ds.horizon() - 1),
    }
}

/// Largest `|z_{n+1} - a_n z_n - b_n z_{n±k}| / max(1, |z_{n+1}|)` over the
/// imposed indices, evaluated in the original (non-rearranged) form.
pub fn recursion_residual(ds: &DiscreteSystem, sol: &DiscreteSolution) -> f64 {
    let k = ds.k as i64;
    let mut worst: f64 = 0.0;
    for n in recursion_indices(ds, sol) {
        let other = match ds.direction {
            Direction::Delayed => n - k,
            Direction::Advanced => n + k,
        };
        let (Some(zn), Some(z_next), Some(z_other)) = (sol.z(n), sol.z(n + 1), sol.z(other)) else {
            continue;
        };
        let i = (n - ds.n0) as usize;
        let r = z_next - ds.a_seq[i] * zn - ds.b_seq[i] * z_other;
        worst = worst.max(r.abs() / z_next.abs().max(1.0));
    }
    worst
}

/// `y_n = α_n z_n` for `n0 <= n <= min(n_hi, horizon)`; element `i` is
/// `y_{n0+i}`. Stops before the first product that is not finite.
pub fn reduce_to_y(ds: &DiscreteSystem, sol: &DiscreteSolution) -> Vec<f64> {
    let hi = sol.n_hi().min(ds.horizon());
    (ds.n0..=hi)
        .map_while(|n| Some(ds.alpha(n).ok()? * sol.z(n)?).filter(|y| y.is_finite()))
        .collect()
}

/// Largest `|Δy_n - Q_n y_{n±k}|` over the indices where both sides are
/// available, divided by `max_n |y_n|`.
pub fn reduced_residual(ds: &DiscreteSystem, sol: &DiscreteSolution) -> f64 {
    let y = reduce_to_y(ds, sol);
    reduced_residual_from(ds, sol, &y, ds.n0)
}

/// Largest `|Δy_n - Q_n y_{n±k}|` over `n` in the last `tail_fraction` of
/// the finite `y` sequence, divided by the largest `|y_n|` there.
pub fn reduced_residual_tail(ds: &DiscreteSystem, sol: &DiscreteSolution, tail_fraction: f64) -> f64 {
    let y = reduce_to_y(ds, sol);
    let first = ds.n0 + (y.len() - tail_len(y.len(), tail_fraction)) as i64;
    reduced_residual_from(ds, sol, &y, first)
}

fn reduced_residual_from(ds: &DiscreteSystem, sol: &DiscreteSolution, y: &[f64], first: i64) -> f64 {
    let y_at = |n: i64| -> Option<f64> {
        if n < ds.n0 {
            return None;
        }
        y.get((n - ds.n0) as usize).copied()
    };
    let scale = (first..ds.n0 + y.len() as i64).fold(0.0f64, |m, n| m.max(y_at(n).map_or(0.0, f64::abs)));
    if scale == 0.0 {
        return 0.0;
    }
    let k = ds.k as i64;
    let mut worst: f64 = 0.0;
    for n in recursion_indices(ds, sol).filter(|&n| n >= first) {
        let other = match ds.direction {
            Direction::Delayed => n - k,
            Direction::Advanced => n + k,
        };
        let (Ok(q), Some(y0), Some(y1), Some(yo)) = (ds.q(n), y_at(n), y_at(n + 1), y_at(other)) else {
            continue;
        };
        worst = worst.max((y1 - y0 - q * yo).abs());
    }
    worst / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignVerdict {
    Oscillatory,
    EventuallyPositive,
    EventuallyNegative,
    Inconclusive,
}

impl SignVerdict {
    pub fn is_nonoscillatory(self) -> bool {
        matches!(self, SignVerdict::EventuallyPositive | SignVerdict::EventuallyNegative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationVerdictDiscrete {
    pub verdict: SignVerdict,
    /// Last `n` anywhere in the solution with `z_n z_{n+1} <= 0`.
    pub last_sign_change: Option<i64>,
    /// Examined index range, inclusive.
    pub tail_window: (i64, i64),
}

/// Default sign-change window for deviation `k` over a tail of `tail_points`
/// points: `max(2(k + 1), tail_points / 2)`. Semi-cycles lengthen without
/// bound as `Q_n` approaches a criterion threshold, so the window grows with
/// the examined tail instead of staying at `2(k + 1)`.
pub fn default_window(k: usize, tail_points: usize) -> usize {
    (2 * (k + 1)).max(tail_points / 2)
}

/// Number of trailing points examined out of `len`.
pub fn tail_len(len: usize, tail_fraction: f64) -> usize {
    ((len as f64 * tail_fraction).ceil() as usize).min(len)
}

/// Empirical version of "for every M there is n >= M with z_n z_{n+1} <= 0":
/// within the last `tail_fraction` of the indices, every run of `window`
/// consecutive pairs must contain a sign change (a zero counts).
pub fn discrete_oscillation_check(
    sol: &DiscreteSolution,
    tail_fraction: f64,
    window: usize,
) -> Result<OscillationVerdictDiscrete> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) || window == 0 {
        return Err(Error::InvalidSpec(format!(
            "tail_fraction must be in (0, 1] and window positive, got {tail_fraction} and {window}"
        )));
    }
    let z = &sol.values;
    let tail = tail_len(z.len(), tail_fraction);
    if tail < 2 * window {
        return Err(Error::TooShort {
            len: tail,
            needed: 2 * window,
        });
    }
    let start = z.len() - tail;
    let change = |i: usize| z[i] * z[i + 1] <= 0.0;
    let last_sign_change = (0..z.len() - 1).rev().find(|&i| change(i)).map(|i| sol.n_lo + i as i64);

    let flags: Vec<bool> = (start..z.len() - 1).map(change).collect();
    let tail_window = (sol.n_lo + start as i64, sol.n_hi());
    let every_window = flags.windows(window).all(|w| w.iter().any(|&c| c));
    let verdict = if every_window {
        SignVerdict::Oscillatory
    } else if flags.iter().all(|&c| !c) {
        if z[start] > 0.0 {
            SignVerdict::EventuallyPositive
        } else {
            SignVerdict::EventuallyNegative
        }
    } else {
        SignVerdict::Inconclusive
    };
    Ok(OscillationVerdictDiscrete {
        verdict,
        last_sign_change,
        tail_window,
    })
}
