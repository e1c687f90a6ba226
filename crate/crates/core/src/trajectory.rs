//! Continuous solution rebuilt from the discrete skeleton. On `[n, n+1)`
//!
//! ```text
//! z(t) = exp(A(n, t)) z_n + z_{n±k} ∫_n^t exp(A(s, t)) b(s) ds,   A(s, t) = ∫_s^t a
//! ```
//!
//! and at each node `z(n+1) = (1 + c_{n+1}) z((n+1)⁻)`.

use serde::Serialize;

use crate::diffeq::{tail_len, DiscreteSolution, SignVerdict};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::problem::{Direction, ProblemSpec};
use crate::quad::{exponent, propagated_integral};
use crate::reduction::DiscreteSystem;

pub const DEFAULT_SAMPLES_PER_INTERVAL: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Node {
    pub n: i64,
    /// `z(n⁻)` from the interval formula.
    pub z_left: f64,
    /// `z(n)`, the discrete solution value.
    pub z_right: f64,
    pub jump_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(t, z(t))`, strictly increasing in `t`; node times carry the
    /// right-continuous value.
    pub samples: Vec<(f64, f64)>,
    /// One entry per interior or closing node `n + 1` of each interval `n`.
    pub nodes: Vec<Node>,
    pub first_interval: i64,
    /// Number of reconstructed unit intervals.
    pub intervals: usize,
    pub samples_per_interval: usize,
    pub direction: Direction,
    pub k: usize,
}

struct Piece {
    samples: Vec<(f64, f64)>,
    node: Node,
}

fn piece(spec: &ProblemSpec, sol: &DiscreteSolution, n: i64, per: usize, tol: f64) -> Result<Piece> {
    let k = spec.k_i64();
    let driver_index = match spec.direction {
        Direction::Delayed => n - k,
        Direction::Advanced => n + k,
    };
    let missing = |i| Error::IndexOutOfRange {
        n: i,
        lo: sol.n_lo,
        hi: sol.n_hi(),
    };
    let zn = sol.z(n).ok_or_else(|| missing(n))?;
    let driver = sol.z(driver_index).ok_or_else(|| missing(driver_index))?;
    let z_next = sol.z(n + 1).ok_or_else(|| missing(n + 1))?;
    let start = n as f64;
    let at = |t: f64| -> Result<f64> {
        let quad = |source| Error::Quadrature { n, source };
        let growth = exponent(&spec.a, start, t, tol).map_err(quad)?;
        let forcing = propagated_integral(&spec.a, &spec.b, start, t, t, tol).map_err(quad)?;
        Ok(growth.exp() * zn + driver * forcing)
    };
    let mut samples = Vec::with_capacity(per);
    samples.push((start, zn));
    for j in 1..per {
        let t = start + j as f64 / per as f64;
        samples.push((t, at(t)?));
    }
    let z_left = at(start + 1.0)?;
    Ok(Piece {
        samples,
        node: Node {
            n: n + 1,
            z_left,
            z_right: z_next,
            jump_factor: spec.impulse.factor(n + 1)?,
        },
    })
}

/// Intervals `[n, n+1)` the solution supports, inclusive.
pub fn interval_range(spec: &ProblemSpec, sol: &DiscreteSolution) -> (i64, i64) {
    let k = spec.k_i64();
    match spec.direction {
        Direction::Delayed => (spec.n0, (sol.n_hi() - 1).min(spec.horizon - 1)),
        Direction::Advanced => (spec.n0 + 1, (sol.n_hi() - k).min(spec.horizon - 1)),
    }
}

pub fn reconstruct(
    spec: &ProblemSpec,
    sol: &DiscreteSolution,
    samples_per_interval: usize,
    tol: f64,
) -> Result<Trajectory> {
    reconstruct_with(spec, sol, samples_per_interval, tol, Exec::default())
}

/// Rebuilds `z(t)` on every supported interval. Reconstruction stops before
/// the first interval whose values are not finite.
pub fn reconstruct_with(
    spec: &ProblemSpec,
    sol: &DiscreteSolution,
    samples_per_interval: usize,
    tol: f64,
    exec: Exec,
) -> Result<Trajectory> {
    if samples_per_interval == 0 {
        return Err(Error::InvalidSpec("samples_per_interval must be positive".into()));
    }
    let (first, last) = interval_range(spec, sol);
    let pieces = exec
        .map_range(first, last + 1, |n| piece(spec, sol, n, samples_per_interval, tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::with_capacity(pieces.len() * samples_per_interval + 1);
    let mut nodes = Vec::with_capacity(pieces.len());
    for p in pieces {
        let finite =
            p.samples.iter().all(|(_, z)| z.is_finite()) && p.node.z_left.is_finite() && p.node.z_right.is_finite();
        if !finite {
            break;
        }
        samples.extend(p.samples);
        nodes.push(p.node);
    }
    if let Some(last_node) = nodes.last() {
        samples.push((last_node.n as f64, last_node.z_right));
    }
    Ok(Trajectory {
        samples,
        intervals: nodes.len(),
        nodes,
        first_interval: first,
        samples_per_interval,
        direction: spec.direction,
        k: spec.k,
    })
}

/// Convenience overload taking the discrete system for range checks.
pub fn reconstruct_from(
    spec: &ProblemSpec,
    ds: &DiscreteSystem,
    sol: &DiscreteSolution,
    samples_per_interval: usize,
    tol: f64,
) -> Result<Trajectory> {
    if ds.direction != spec.direction || ds.k != spec.k || ds.n0 != spec.n0 {
        return Err(Error::InvalidSpec(
            "discrete system does not belong to this problem".into(),
        ));
    }
    reconstruct(spec, sol, samples_per_interval, tol)
}

impl Trajectory {
    /// Samples of interval `i` (0-based), its right-node left limit and right value.
    fn interval_points(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let per = self.samples_per_interval;
        let node = self.nodes[i];
        self.samples[i * per..(i + 1) * per]
            .iter()
            .map(|&(_, z)| z)
            .chain([node.z_left, node.z_right])
    }

    /// Largest `|z_left - z_right| / max(1, |z_left|)` over the nodes.
    pub fn max_node_discontinuity(&self) -> f64 {
        self.nodes
            .iter()
            .map(|nd| (nd.z_left - nd.z_right).abs() / nd.z_left.abs().max(1.0))
            .fold(0.0, f64::max)
    }

    /// Largest relative mismatch of `(1 + c_{n+1}) z((n+1)⁻) = z_{n+1}`, scaled
    /// by the size of the terms that build `z_{n+1}`.
    pub fn max_node_inconsistency(&self, ds: &DiscreteSystem, sol: &DiscreteSolution) -> f64 {
        let k = ds.k as i64;
        self.nodes
            .iter()
            .map(|nd| {
                let n = nd.n - 1;
                let other = match ds.direction {
                    Direction::Delayed => n - k,
                    Direction::Advanced => n + k,
                };
                let lhs = nd.jump_factor * nd.z_left;
                let rhs = nd.z_right;
                let terms = match (ds.a(n), ds.b(n), sol.z(n), sol.z(other)) {
                    (Ok(a), Ok(b), Some(zn), Some(zo)) => (a * zn).abs() + (b * zo).abs(),
                    _ => 0.0,
                };
                let scale = lhs.abs().max(rhs.abs()).max(terms);
                if scale == 0.0 {
                    0.0
                } else {
                    (lhs - rhs).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|z_right - jump_factor · z_left| / max(|z_right|, |jump_factor · z_left|)`.
    pub fn max_jump_mismatch(&self) -> f64 {
        self.nodes
            .iter()
            .map(|nd| {
                let expected = nd.jump_factor * nd.z_left;
                let scale = expected.abs().max(nd.z_right.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (nd.z_right - expected).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousVerdict {
    pub verdict: SignVerdict,
    /// Examined time range `[start, end]`.
    pub tail_window: (f64, f64),
}

/// Neither eventually positive nor eventually negative, at desk scale: every
/// run of `window_intervals` consecutive tail intervals must contain a point
/// `<= 0` and a point `>= 0`. Node left limits count as points.
pub fn continuous_oscillation_check(
    traj: &Trajectory,
    tail_fraction: f64,
    window_intervals: usize,
) -> Result<ContinuousVerdict> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) || window_intervals == 0 {
        return Err(Error::InvalidSpec(format!(
            "tail_fraction must be in (0, 1] and window positive, got {tail_fraction} and {window_intervals}"
        )));
    }
    let tail = tail_len(traj.intervals, tail_fraction);
    if tail < 2 * window_intervals {
        return Err(Error::TooShort {
            len: tail,
            needed: 2 * window_intervals,
        });
    }
    let start = traj.intervals - tail;
    // (has a point <= 0, has a point >= 0, all > 0, all < 0) per interval
    let signs: Vec<(bool, bool, bool, bool)> = (start..traj.intervals)
        .map(|i| {
            traj.interval_points(i)
                .fold((false, false, true, true), |(np, nn, ap, an), z| {
                    (np || z <= 0.0, nn || z >= 0.0, ap && z > 0.0, an && z < 0.0)
                })
        })
        .collect();
    let every_block = signs
        .windows(window_intervals)
        .all(|w| w.iter().any(|s| s.0) && w.iter().any(|s| s.1));
    let verdict = if every_block {
        SignVerdict::Oscillatory
    } else if signs.iter().all(|s| s.2) {
        SignVerdict::EventuallyPositive
    } else if signs.iter().all(|s| s.3) {
        SignVerdict::EventuallyNegative
    } else {
        SignVerdict::Inconclusive
    };
    let t0 = (traj.first_interval + start as i64) as f64;
    let t1 = (traj.first_interval + traj.intervals as i64) as f64;
    Ok(ContinuousVerdict {
        verdict,
        tail_window: (t0, t1),
    })
}
