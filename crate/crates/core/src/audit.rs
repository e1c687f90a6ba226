//! Consistency checks on a solved instance. Each check yields a row with the
//! measured value and its limit; the CLI prints them and the acceptance suite
//! aggregates them over the random battery.

use serde::Serialize;

use crate::criteria::{analyze, Analysis, OverallVerdict};
use crate::diffeq::{
    default_window, discrete_oscillation_check, recursion_residual, reduced_residual_tail, solve, tail_len,
    DiscreteSolution, OscillationVerdictDiscrete, SignVerdict,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::Expr;
use crate::problem::{ImpulseSpec, ProblemSpec};
use crate::quad::exponent;
use crate::reduction::{build_discrete_system_with, DiscreteSystem, AUDIT_REL_TOL};
use crate::trajectory::{continuous_oscillation_check, reconstruct_with, ContinuousVerdict, Trajectory};

pub const TELESCOPING_TOL: f64 = 1e-12;
pub const RECURSION_TOL: f64 = 1e-9;
pub const REDUCED_TOL: f64 = 1e-8;
pub const CONTINUITY_TOL: f64 = 1e-8;
pub const NODE_TOL: f64 = 1e-7;
/// Pure ODE samples against `exp(A) z_{n0}`, relative.
pub const PURE_ODE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// The check does not apply to this instance.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

impl CheckRow {
    fn measured(name: &'static str, value: f64, limit: f64) -> Self {
        CheckRow {
            name,
            status: if value <= limit { Status::Pass } else { Status::Fail },
            value: Some(value),
            limit: Some(limit),
            detail: String::new(),
        }
    }

    fn verdict(name: &'static str, ok: bool, detail: String) -> Self {
        CheckRow {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            value: None,
            limit: None,
            detail,
        }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        CheckRow {
            name,
            status: Status::Skipped,
            value: None,
            limit: None,
            detail: detail.into(),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub tail_fraction: f64,
    pub samples_per_interval: usize,
    /// Compare the two `Q_n` routes only for `n` up to this index.
    pub dual_route_cap: Option<i64>,
    pub exec: Exec,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: crate::quad::DEFAULT_TOL,
            tail_fraction: 0.5,
            samples_per_interval: crate::trajectory::DEFAULT_SAMPLES_PER_INTERVAL,
            dual_route_cap: None,
            exec: Exec::default(),
        }
    }
}

/// Everything computed for one instance, plus the check rows.
#[derive(Debug, Clone)]
pub struct InstanceCheck {
    pub system: DiscreteSystem,
    pub solution: DiscreteSolution,
    pub trajectory: Trajectory,
    pub analysis: Analysis,
    pub discrete: Result<OscillationVerdictDiscrete>,
    pub continuous: Result<ContinuousVerdict>,
    pub rows: Vec<CheckRow>,
}

impl InstanceCheck {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.status == Status::Fail)
    }
}

/// Worst `|Q_alpha - Q_direct| / max(|Q_alpha|, |Q_direct|)` for `n <= cap`,
/// with the index where it occurs.
pub fn dual_route_disagreement(ds: &DiscreteSystem, cap: Option<i64>) -> Option<(f64, i64)> {
    if ds.q_direct_seq.is_empty() {
        return None;
    }
    ds.q_iter()
        .zip(&ds.q_direct_seq)
        .filter(|((n, _), _)| cap.is_none_or(|c| *n <= c))
        .map(|((n, qa), &qd)| {
            let scale = qa.abs().max(qd.abs());
            let rel = if scale == 0.0 { 0.0 } else { (qa - qd).abs() / scale };
            (rel, n)
        })
        .max_by(|x, y| x.0.total_cmp(&y.0))
}

/// Worst `|α_{n+1} a_n - α_n| / |α_n|` over the steps where both α values
/// are normal floats.
pub fn telescoping_defect(ds: &DiscreteSystem) -> f64 {
    ds.a_seq
        .iter()
        .enumerate()
        .filter(|&(i, _)| ds.alpha_seq[i].is_normal() && ds.alpha_seq[i + 1].is_normal())
        .map(|(i, a)| {
            let (lo, hi) = (ds.alpha_seq[i], ds.alpha_seq[i + 1]);
            (hi * a - lo).abs() / lo.abs()
        })
        .fold(0.0, f64::max)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

/// Worst relative gap between samples and `exp(∫_{n0}^t a) z_{n0}` when the
/// instance is a plain linear ODE.
fn pure_ode_defect(spec: &ProblemSpec, sol: &DiscreteSolution, traj: &Trajectory, tol: f64) -> Result<f64> {
    let z0 = sol.z(spec.n0).ok_or(Error::IndexOutOfRange {
        n: spec.n0,
        lo: sol.n_lo,
        hi: sol.n_hi(),
    })?;
    let t0 = spec.n0 as f64;
    let mut worst: f64 = 0.0;
    for &(t, z) in &traj.samples {
        let growth = exponent(&spec.a, t0, t, tol).map_err(|source| Error::Quadrature {
            n: t.floor() as i64,
            source,
        })?;
        let expected = growth.exp() * z0;
        let scale = expected.abs().max(z.abs());
        if scale > 0.0 {
            worst = worst.max((z - expected).abs() / scale);
        }
    }
    Ok(worst)
}

fn soundness(analysis: &Analysis, discrete: &Result<OscillationVerdictDiscrete>) -> CheckRow {
    const NAME: &str = "criteria_vs_simulation";
    let firing: Vec<_> = analysis.reports.iter().filter(|r| r.fires()).collect();
    if firing.is_empty() {
        return CheckRow::skipped(NAME, "no criterion fires");
    }
    let verdict = match discrete {
        Ok(v) => v.verdict,
        Err(e) => return CheckRow::skipped(NAME, format!("discrete check unavailable: {e}")),
    };
    let contradicted: Vec<&str> = firing
        .iter()
        .filter(|r| {
            if r.criterion_id.proves_oscillation() {
                verdict != SignVerdict::Oscillatory
            } else {
                !verdict.is_nonoscillatory()
            }
        })
        .map(|r| r.criterion_id.name())
        .collect();
    let detail = format!(
        "discrete verdict {verdict:?}; firing: {}",
        firing
            .iter()
            .map(|r| r.criterion_id.name())
            .collect::<Vec<_>>()
            .join(", ")
    );
    if contradicted.is_empty() {
        CheckRow::verdict(NAME, true, detail)
    } else {
        CheckRow::verdict(
            NAME,
            false,
            format!("{detail}; contradicted: {}", contradicted.join(", ")),
        )
    }
}

/// [`check_instance`] over every spec, distributed per instance by
/// `opts.exec`; results keep the input order.
pub fn check_all(specs: &[ProblemSpec], opts: CheckOptions) -> Vec<Result<InstanceCheck>> {
    opts.exec.map_slice(specs, |s| check_instance(s, opts))
}

/// Builds, solves, reconstructs and analyzes `spec`, then evaluates every
/// check that applies. Build, solve and reconstruction errors propagate.
pub fn check_instance(spec: &ProblemSpec, opts: CheckOptions) -> Result<InstanceCheck> {
    let ds = build_discrete_system_with(spec, opts.tol, opts.exec)?;
    let sol = solve(&ds, &spec.initial_window)?;
    let traj = reconstruct_with(spec, &sol, opts.samples_per_interval, opts.tol, opts.exec)?;
    let analysis = analyze(&ds, opts.tail_fraction);
    // One window for both checks, sized by the shorter interval tail, so that
    // a discrete sign change in every block shows up in every continuous block.
    let window = default_window(spec.k, tail_len(traj.intervals, opts.tail_fraction));
    let discrete = discrete_oscillation_check(&sol, opts.tail_fraction, window);
    let continuous = continuous_oscillation_check(&traj, opts.tail_fraction, window);

    let mut rows = Vec::new();
    match dual_route_disagreement(&ds, opts.dual_route_cap) {
        Some((rel, n)) => {
            rows.push(CheckRow::measured("dual_route_q", rel, AUDIT_REL_TOL).with_detail(format!("worst at n = {n}")))
        }
        None => rows.push(CheckRow::skipped("dual_route_q", "no Q_n indices")),
    }
    rows.push(CheckRow::measured(
        "alpha_telescoping",
        telescoping_defect(&ds),
        TELESCOPING_TOL,
    ));
    rows.push(CheckRow::measured(
        "recursion_residual",
        recursion_residual(&ds, &sol),
        RECURSION_TOL,
    ));
    rows.push(CheckRow::measured(
        "reduced_residual",
        reduced_residual_tail(&ds, &sol, opts.tail_fraction),
        REDUCED_TOL,
    ));
    if traj.nodes.is_empty() {
        rows.push(CheckRow::skipped("node_consistency", "no reconstructed intervals"));
    } else {
        rows.push(CheckRow::measured(
            "node_consistency",
            traj.max_node_inconsistency(&ds, &sol),
            NODE_TOL,
        ));
    }
    if spec.impulse == ImpulseSpec::None && !traj.nodes.is_empty() {
        rows.push(CheckRow::measured(
            "depca_continuity",
            traj.max_node_discontinuity(),
            CONTINUITY_TOL,
        ));
    } else {
        rows.push(CheckRow::skipped("depca_continuity", "instance has impulses"));
    }
    if is_zero(&spec.b) && spec.impulse == ImpulseSpec::None {
        rows.push(CheckRow::measured(
            "pure_ode",
            pure_ode_defect(spec, &sol, &traj, opts.tol)?,
            PURE_ODE_TOL,
        ));
    } else {
        rows.push(CheckRow::skipped(
            "pure_ode",
            "b is not identically zero or impulses present",
        ));
    }
    rows.push(match (&discrete, &continuous) {
        (Ok(d), Ok(c)) if d.verdict == SignVerdict::Oscillatory => CheckRow::verdict(
            "discrete_to_continuous",
            c.verdict == SignVerdict::Oscillatory,
            format!("continuous verdict {:?}", c.verdict),
        ),
        (Ok(d), _) if d.verdict != SignVerdict::Oscillatory => {
            CheckRow::skipped("discrete_to_continuous", format!("discrete verdict {:?}", d.verdict))
        }
        (Err(e), _) | (_, Err(e)) => {
            CheckRow::skipped("discrete_to_continuous", format!("empirical check unavailable: {e}"))
        }
        _ => unreachable!("covered above"),
    });
    rows.push(soundness(&analysis, &discrete));
    rows.push(CheckRow::verdict(
        "no_criterion_conflict",
        analysis.overall != OverallVerdict::ConflictDetected,
        format!("overall verdict {:?}", analysis.overall),
    ));

    Ok(InstanceCheck {
        system: ds,
        solution: sol,
        trajectory: traj,
        analysis,
        discrete,
        continuous,
        rows,
    })
}
