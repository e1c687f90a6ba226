//! Oscillation and nonoscillation criteria for the reduced equations
//! `Δy_n + Q*_n y_{n-k} = 0` (delayed) and `Δy_n - Q_n y_{n+ℓ} = 0` (advanced),
//! evaluated on a finite tail.
//!
//! `liminf` and `limsup` are approximated by the minimum and maximum over the
//! trailing `tail_fraction` of a sequence. A criterion only fires when that
//! estimate agrees with the one taken over the last half of the same window.

use serde::Serialize;

use crate::diffeq::tail_len;
use crate::error::{Error, Result};
use crate::problem::Direction;
use crate::reduction::DiscreteSystem;

/// Relative agreement required between the two tail estimates.
pub const CONVERGENCE_REL_TOL: f64 = 1e-3;

/// Shortest sequence [`tail_stats`] accepts.
pub const MIN_TAIL_SEQ: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailKind {
    Liminf,
    Limsup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailStats {
    pub statistic: f64,
    pub kind: TailKind,
    /// Inclusive window, as positions in the input sequence (or indices `n`
    /// once attached to a report).
    pub window: (i64, i64),
    pub convergence_flag: bool,
}

fn extremum(values: &[f64], kind: TailKind) -> f64 {
    match kind {
        TailKind::Liminf => values.iter().copied().fold(f64::INFINITY, f64::min),
        TailKind::Limsup => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Tail minimum or maximum over the last `tail_fraction` of `seq`.
pub fn tail_stats(seq: &[f64], kind: TailKind, tail_fraction: f64) -> Result<TailStats> {
    if seq.len() < MIN_TAIL_SEQ {
        return Err(Error::TooShort {
            len: seq.len(),
            needed: MIN_TAIL_SEQ,
        });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "tail_fraction must be in (0, 1], got {tail_fraction}"
        )));
    }
    let tail = tail_len(seq.len(), tail_fraction).max(2);
    let start = seq.len() - tail;
    let window = &seq[start..];
    let statistic = extremum(window, kind);
    let inner = extremum(&window[tail / 2..], kind);
    let convergence_flag = (statistic - inner).abs() <= CONVERGENCE_REL_TOL * statistic.abs().max(inner.abs());
    Ok(TailStats {
        statistic,
        kind,
        window: (start as i64, seq.len() as i64 - 1),
        convergence_flag,
    })
}

/// `k^k / (k+1)^{k+1}`.
pub fn erbe_zhang_threshold(k: usize) -> f64 {
    let k = k as i32;
    (k as f64).powi(k) / ((k + 1) as f64).powi(k + 1)
}

/// `(k / (k+1))^{k+1}`.
pub fn ladas_philos_sficas_threshold(k: usize) -> f64 {
    let k = k as i32;
    (k as f64).powi(k + 1) / ((k + 1) as f64).powi(k + 1)
}

/// `((ℓ-1) / ℓ)^ℓ`.
pub fn gyori_ladas_threshold(l: usize) -> f64 {
    let l = l as i32;
    ((l - 1) as f64).powi(l) / (l as f64).powi(l)
}

/// `(ℓ-1)^{ℓ-1} / ℓ^ℓ`.
pub fn ocalan_akin_threshold(l: usize) -> f64 {
    let l = l as i32;
    ((l - 1) as f64).powi(l - 1) / (l as f64).powi(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CriterionId {
    ErbeZhang,
    LadasPhilosSficas,
    GyoriLadasA,
    GyoriLadasB,
    OcalanAkin,
    GyoriLadasNonOsc,
    OcalanAkinNonOsc,
}

impl CriterionId {
    pub const ALL: [CriterionId; 7] = [
        CriterionId::ErbeZhang,
        CriterionId::LadasPhilosSficas,
        CriterionId::GyoriLadasA,
        CriterionId::GyoriLadasB,
        CriterionId::OcalanAkin,
        CriterionId::GyoriLadasNonOsc,
        CriterionId::OcalanAkinNonOsc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CriterionId::ErbeZhang => "ErbeZhang",
            CriterionId::LadasPhilosSficas => "LadasPhilosSficas",
            CriterionId::GyoriLadasA => "GyoriLadasA",
            CriterionId::GyoriLadasB => "GyoriLadasB",
            CriterionId::OcalanAkin => "OcalanAkin",
            CriterionId::GyoriLadasNonOsc => "GyoriLadasNonOsc",
            CriterionId::OcalanAkinNonOsc => "OcalanAkinNonOsc",
        }
    }

    /// True for criteria that conclude oscillation, false for nonoscillation.
    pub fn proves_oscillation(self) -> bool {
        !matches!(self, CriterionId::GyoriLadasNonOsc | CriterionId::OcalanAkinNonOsc)
    }

    pub fn direction(self) -> Direction {
        match self {
            CriterionId::ErbeZhang | CriterionId::LadasPhilosSficas | CriterionId::GyoriLadasNonOsc => {
                Direction::Delayed
            }
            _ => Direction::Advanced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionVerdict {
    Fires,
    DoesNotFire,
    PreconditionViolated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreconditionViolation {
    pub n: i64,
    pub condition: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion_id: CriterionId,
    pub threshold: f64,
    /// Tail statistic; `window` holds indices `n` of the underlying series.
    pub statistic: TailStats,
    /// Oriented so that a positive margin means the inequality holds.
    pub margin: f64,
    pub preconditions_ok: bool,
    pub precondition_violations: Vec<PreconditionViolation>,
    pub verdict: CriterionVerdict,
    pub note: Option<&'static str>,
}

impl CriterionReport {
    pub fn fires(&self) -> bool {
        self.verdict == CriterionVerdict::Fires
    }
}

#[derive(Clone, Copy)]
enum BSign {
    Negative,
    Positive,
}

struct Rule {
    id: CriterionId,
    kind: TailKind,
    threshold: f64,
    /// Term offsets `[lo, hi]` of `Q_j` contributing to series entry `n`.
    terms: (i64, i64),
    b_sign: BSign,
    /// `margin >= 0` suffices (pointwise `<=` conditions).
    inclusive: bool,
    note: Option<&'static str>,
}

fn require(ds: &DiscreteSystem, id: CriterionId) -> Result<()> {
    if ds.direction != id.direction() {
        return Err(Error::WrongDirection {
            criterion: id.name(),
            expected: id.direction(),
        });
    }
    if ds.direction == Direction::Advanced && ds.k < 2 {
        return Err(Error::AdvanceTooSmall(ds.k));
    }
    Ok(())
}

/// Series `Σ_{j=n+lo}^{n+hi} f(Q_j)` over every `n` with all terms stored.
fn moving_sum(ds: &DiscreteSystem, (lo, hi): (i64, i64), f: impl Fn(f64) -> f64) -> (i64, Vec<f64>) {
    let first = ds.q_lo - lo;
    let last = ds.q_hi() - hi;
    let values = (first..=last)
        .map(|n| {
            (n + lo..=n + hi)
                .map(|j| f(ds.q(j).expect("index within Q range")))
                .sum()
        })
        .collect();
    (first, values)
}

fn assess(
    ds: &DiscreteSystem,
    rule: Rule,
    margin_of: impl Fn(f64) -> f64,
    tail: f64,
    f: impl Fn(f64) -> f64,
) -> Result<CriterionReport> {
    require(ds, rule.id)?;
    let (first, series) = moving_sum(ds, rule.terms, f);
    let mut stats = tail_stats(&series, rule.kind, tail)?;
    stats.window = (first + stats.window.0, first + stats.window.1);

    let mut violations = Vec::new();
    for j in stats.window.0 + rule.terms.0..=stats.window.1 + rule.terms.1 {
        if ds.a(j)? <= 0.0 {
            violations.push(PreconditionViolation {
                n: j,
                condition: "a_n > 0",
            });
        }
        let b = ds.b(j)?;
        match rule.b_sign {
            BSign::Negative if b >= 0.0 => violations.push(PreconditionViolation {
                n: j,
                condition: "b_n < 0",
            }),
            BSign::Positive if b <= 0.0 => violations.push(PreconditionViolation {
                n: j,
                condition: "b_n > 0",
            }),
            _ => {}
        }
    }

    let margin = margin_of(stats.statistic);
    let holds = if rule.inclusive { margin >= 0.0 } else { margin > 0.0 };
    let verdict = if !violations.is_empty() {
        CriterionVerdict::PreconditionViolated
    } else if holds && stats.convergence_flag {
        CriterionVerdict::Fires
    } else {
        CriterionVerdict::DoesNotFire
    };
    Ok(CriterionReport {
        criterion_id: rule.id,
        threshold: rule.threshold,
        statistic: stats,
        margin,
        preconditions_ok: violations.is_empty(),
        precondition_violations: violations,
        verdict,
        note: rule.note,
    })
}

/// `liminf Q*_n > k^k/(k+1)^{k+1}` implies every solution oscillates (delayed, `b_n < 0`).
pub fn erbe_zhang(ds: &DiscreteSystem, tail: f64) -> Result<CriterionReport> {
    let threshold = erbe_zhang_threshold(ds.k);
    let rule = Rule {
        id: CriterionId::ErbeZhang,
        kind: TailKind::Liminf,
        threshold,
        terms: (0, 0),
        b_sign: BSign::Negative,
        inclusive: false,
        note: None,
    };
    assess(ds, rule, |s| s - threshold, tail, |q| -q)
}

/// `liminf Σ_{j=n-k}^{n-1} Q*_j > (k/(k+1))^{k+1}` implies oscillation (delayed, `b_n < 0`).
pub fn ladas_philos_sficas(ds: &DiscreteSystem, tail: f64) -> Result<CriterionReport> {
    let k = ds.k as i64;
    let threshold = ladas_philos_sficas_threshold(ds.k);
    let rule = Rule {
        id: CriterionId::LadasPhilosSficas,
        kind: TailKind::Liminf,
        threshold,
        terms: (-k, -1),
        b_sign: BSign::Negative,
        inclusive: false,
        note: None,
    };
    assess(ds, rule, |s| s - threshold, tail, |q| -q)
}

/// Two sufficient conditions for oscillation of the advanced equation with
/// `b_n > 0`: (A) `liminf Σ_{s=n+1}^{n+ℓ-1} Q_s > ((ℓ-1)/ℓ)^ℓ` and
/// (B) `limsup Σ_{s=n}^{n+ℓ-1} Q_s > 1`. Either one firing suffices.
pub fn gyori_ladas(ds: &DiscreteSystem, tail: f64) -> Result<(CriterionReport, CriterionReport)> {
    require(ds, CriterionId::GyoriLadasA)?;
    let l = ds.k as i64;
    let threshold = gyori_ladas_threshold(ds.k);
    let a = assess(
        ds,
        Rule {
            id: CriterionId::GyoriLadasA,
            kind: TailKind::Liminf,
            threshold,
            terms: (1, l - 1),
            b_sign: BSign::Positive,
            inclusive: false,
            note: None,
        },
        |s| s - threshold,
        tail,
        |q| q,
    )?;
    let b = assess(
        ds,
        Rule {
            id: CriterionId::GyoriLadasB,
            kind: TailKind::Limsup,
            threshold: 1.0,
            terms: (0, l - 1),
            b_sign: BSign::Positive,
            inclusive: false,
            note: None,
        },
        |s| s - 1.0,
        tail,
        |q| q,
    )?;
    Ok((a, b))
}

/// `limsup Q_n < -(ℓ-1)^{ℓ-1}/ℓ^ℓ` implies oscillation (advanced, `b_n < 0`).
pub fn ocalan_akin(ds: &DiscreteSystem, tail: f64) -> Result<CriterionReport> {
    let threshold = -ocalan_akin_threshold(ds.k);
    let rule = Rule {
        id: CriterionId::OcalanAkin,
        kind: TailKind::Limsup,
        threshold,
        terms: (0, 0),
        b_sign: BSign::Negative,
        inclusive: false,
        note: Some(
            "evaluated on signed Q_n; written with Q*_n = -Q_n > 0 the bound below a negative number could never hold",
        ),
    };
    assess(ds, rule, |s| threshold - s, tail, |q| q)
}

/// `Q*_n <= k^k/(k+1)^{k+1}` at every tail index gives a positive solution
/// (delayed, `b_n < 0`). The statistic is the tail maximum of `Q*_n`.
pub fn gyori_ladas_nonosc(ds: &DiscreteSystem, tail: f64) -> Result<CriterionReport> {
    let threshold = erbe_zhang_threshold(ds.k);
    let rule = Rule {
        id: CriterionId::GyoriLadasNonOsc,
        kind: TailKind::Limsup,
        threshold,
        terms: (0, 0),
        b_sign: BSign::Negative,
        inclusive: true,
        note: Some("pointwise condition checked over the examined tail only"),
    };
    assess(ds, rule, |s| threshold - s, tail, |q| -q)
}

/// `liminf Q_n > -(ℓ-1)^{ℓ-1}/ℓ^ℓ` taken to imply nonoscillation (advanced, `b_n > 0`).
pub fn ocalan_akin_nonosc(ds: &DiscreteSystem, tail: f64) -> Result<CriterionReport> {
    let threshold = -ocalan_akin_threshold(ds.k);
    let rule = Rule {
        id: CriterionId::OcalanAkinNonOsc,
        kind: TailKind::Liminf,
        threshold,
        terms: (0, 0),
        b_sign: BSign::Positive,
        inclusive: false,
        note: Some("with b_n > 0 every Q_n is positive, so the bound holds automatically"),
    };
    assess(ds, rule, |s| s - threshold, tail, |q| q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OverallVerdict {
    Oscillatory,
    Nonoscillatory,
    Inconclusive,
    ConflictDetected,
}

/// Combines criterion outcomes; a firing oscillation criterion together with
/// a firing nonoscillation criterion is reported, not resolved.
pub fn synthesize(reports: &[CriterionReport]) -> OverallVerdict {
    let osc = reports.iter().any(|r| r.fires() && r.criterion_id.proves_oscillation());
    let nonosc = reports
        .iter()
        .any(|r| r.fires() && !r.criterion_id.proves_oscillation());
    match (osc, nonosc) {
        (true, true) => OverallVerdict::ConflictDetected,
        (true, false) => OverallVerdict::Oscillatory,
        (false, true) => OverallVerdict::Nonoscillatory,
        (false, false) => OverallVerdict::Inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub reports: Vec<CriterionReport>,
    /// Criteria that could not be evaluated, with the reason.
    pub skipped: Vec<(CriterionId, String)>,
    pub overall: OverallVerdict,
}

impl Analysis {
    pub fn report(&self, id: CriterionId) -> Option<&CriterionReport> {
        self.reports.iter().find(|r| r.criterion_id == id)
    }
}

/// Runs every criterion matching the system's direction.
pub fn analyze(ds: &DiscreteSystem, tail: f64) -> Analysis {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut push = |id: CriterionId, r: Result<CriterionReport>| match r {
        Ok(r) => reports.push(r),
        Err(e) => skipped.push((id, e.to_string())),
    };
    match ds.direction {
        Direction::Delayed => {
            push(CriterionId::ErbeZhang, erbe_zhang(ds, tail));
            push(CriterionId::LadasPhilosSficas, ladas_philos_sficas(ds, tail));
            push(CriterionId::GyoriLadasNonOsc, gyori_ladas_nonosc(ds, tail));
        }
        Direction::Advanced => {
            match gyori_ladas(ds, tail) {
                Ok((a, b)) => {
                    push(CriterionId::GyoriLadasA, Ok(a));
                    push(CriterionId::GyoriLadasB, Ok(b));
                }
                Err(e) => {
                    push(CriterionId::GyoriLadasA, Err(e.clone()));
                    push(CriterionId::GyoriLadasB, Err(e));
                }
            }
            push(CriterionId::OcalanAkin, ocalan_akin(ds, tail));
            push(CriterionId::OcalanAkinNonOsc, ocalan_akin_nonosc(ds, tail));
        }
    }
    let overall = synthesize(&reports);
    Analysis {
        reports,
        skipped,
        overall,
    }
}
