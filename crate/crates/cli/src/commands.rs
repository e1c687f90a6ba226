use std::fmt::Write as _;
use std::path::Path;

use idepca_core::audit::{check_instance, CheckOptions, InstanceCheck, Status};
use idepca_core::criteria::{analyze, Analysis, CriterionReport, OverallVerdict, PreconditionViolation};
use idepca_core::diffeq::{default_window, discrete_oscillation_check, tail_len, OscillationVerdictDiscrete};
use idepca_core::trajectory::{continuous_oscillation_check, reconstruct, ContinuousVerdict, Trajectory};
use idepca_core::{build_discrete_system, solve, CriterionId, CriterionVerdict, DiscreteSystem};
use serde::Serialize;

use crate::format::{csv_row, sig10};
use crate::problem_file::Problem;
use crate::CliError;

pub const COEFFS_HEADER: &str = "n,a_n,b_n,alpha_n,q_n\n";
pub const TRAJECTORY_HEADER: &str = "t,z\n";
pub const NODES_HEADER: &str = "n,z_left,z_right,jump_factor\n";

pub fn coefficient_table(ds: &DiscreteSystem) -> String {
    let mut out = String::from(COEFFS_HEADER);
    for n in ds.n0..ds.horizon() {
        let q = ds.q(n).map(sig10).unwrap_or_default();
        let fields = [
            n.to_string(),
            sig10(ds.a(n).expect("n in coefficient range")),
            sig10(ds.b(n).expect("n in coefficient range")),
            sig10(ds.alpha(n).expect("n in alpha range")),
            q,
        ];
        out.push_str(&csv_row(&fields));
    }
    out
}

pub fn coeffs(problem: &Problem) -> Result<String, CliError> {
    let ds = build_discrete_system(&problem.spec, problem.tol)?;
    Ok(coefficient_table(&ds))
}

#[derive(Debug, Serialize)]
pub struct CriterionEntry<'a> {
    pub criterion_id: CriterionId,
    pub threshold: f64,
    pub statistic: f64,
    pub statistic_window: (i64, i64),
    pub margin: f64,
    pub convergence_flag: bool,
    pub precondition_violations: &'a [PreconditionViolation],
    pub verdict: CriterionVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

impl<'a> From<&'a CriterionReport> for CriterionEntry<'a> {
    fn from(r: &'a CriterionReport) -> Self {
        CriterionEntry {
            criterion_id: r.criterion_id,
            threshold: r.threshold,
            statistic: r.statistic.statistic,
            statistic_window: r.statistic.window,
            margin: r.margin,
            convergence_flag: r.statistic.convergence_flag,
            precondition_violations: &r.precondition_violations,
            verdict: r.verdict,
            note: r.note,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SkippedEntry<'a> {
    pub criterion_id: CriterionId,
    pub reason: &'a str,
}

#[derive(Debug, Serialize)]
pub struct AnalysisDocument<'a> {
    pub overall_verdict: OverallVerdict,
    pub criteria: Vec<CriterionEntry<'a>>,
    pub skipped: Vec<SkippedEntry<'a>>,
}

impl<'a> From<&'a Analysis> for AnalysisDocument<'a> {
    fn from(a: &'a Analysis) -> Self {
        AnalysisDocument {
            overall_verdict: a.overall,
            criteria: a.reports.iter().map(CriterionEntry::from).collect(),
            skipped: a
                .skipped
                .iter()
                .map(|(id, reason)| SkippedEntry {
                    criterion_id: *id,
                    reason,
                })
                .collect(),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn analyze_document(analysis: &Analysis) -> String {
    to_json(&AnalysisDocument::from(analysis))
}

pub fn run_analysis(problem: &Problem) -> Result<Analysis, CliError> {
    let ds = build_discrete_system(&problem.spec, problem.tol)?;
    Ok(analyze(&ds, problem.tail_fraction))
}

pub fn analyze_cmd(problem: &Problem) -> Result<String, CliError> {
    Ok(analyze_document(&run_analysis(problem)?))
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Outcome<T> {
    Verdict(T),
    Unavailable { error: String },
}

impl<T> From<idepca_core::Result<T>> for Outcome<T> {
    fn from(r: idepca_core::Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Verdict(v),
            Err(e) => Outcome::Unavailable { error: e.to_string() },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SimulationVerdict {
    pub window: usize,
    pub tail_fraction: f64,
    pub discrete: Outcome<OscillationVerdictDiscrete>,
    pub continuous: Outcome<ContinuousVerdict>,
    pub max_node_discontinuity: f64,
    pub overflow_at: Option<i64>,
}

/// Files written by `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub trajectory_csv: String,
    pub nodes_csv: String,
    pub verdict_json: String,
}

impl SimulationOutput {
    pub const TRAJECTORY_FILE: &'static str = "trajectory.csv";
    pub const NODES_FILE: &'static str = "nodes.csv";
    pub const VERDICT_FILE: &'static str = "verdict.json";

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        for (name, body) in [
            (Self::TRAJECTORY_FILE, &self.trajectory_csv),
            (Self::NODES_FILE, &self.nodes_csv),
            (Self::VERDICT_FILE, &self.verdict_json),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    for &(t, z) in &traj.samples {
        out.push_str(&csv_row(&[sig10(t), sig10(z)]));
    }
    out
}

pub fn nodes_csv(traj: &Trajectory) -> String {
    let mut out = String::from(NODES_HEADER);
    for nd in &traj.nodes {
        out.push_str(&csv_row(&[
            nd.n.to_string(),
            sig10(nd.z_left),
            sig10(nd.z_right),
            sig10(nd.jump_factor),
        ]));
    }
    out
}

pub fn simulate(problem: &Problem, samples_per_interval: usize) -> Result<SimulationOutput, CliError> {
    let spec = &problem.spec;
    let ds = build_discrete_system(spec, problem.tol)?;
    let sol = solve(&ds, &spec.initial_window)?;
    let traj = reconstruct(spec, &sol, samples_per_interval, problem.tol)?;
    let window = default_window(spec.k, tail_len(traj.intervals, problem.tail_fraction));
    let verdict = SimulationVerdict {
        window,
        tail_fraction: problem.tail_fraction,
        discrete: discrete_oscillation_check(&sol, problem.tail_fraction, window).into(),
        continuous: continuous_oscillation_check(&traj, problem.tail_fraction, window).into(),
        max_node_discontinuity: traj.max_node_discontinuity(),
        overflow_at: sol.overflow_at,
    };
    Ok(SimulationOutput {
        trajectory_csv: trajectory_csv(&traj),
        nodes_csv: nodes_csv(&traj),
        verdict_json: to_json(&verdict),
    })
}

fn status_label(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
    }
}

pub fn check_table(check: &InstanceCheck) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:<6} {:<12} {:<12} detail",
        "check", "status", "value", "limit"
    );
    for row in &check.rows {
        let value = row.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        let limit = row.limit.map(|v| format!("{v:.0e}")).unwrap_or_else(|| "-".into());
        let line = format!(
            "{:<24} {:<6} {:<12} {:<12} {}",
            row.name,
            status_label(row.status),
            value,
            limit,
            row.detail
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let failed: Vec<&str> = check.failures().map(|r| r.name).collect();
    if failed.is_empty() {
        let _ = writeln!(out, "all checks passed");
    } else {
        let _ = writeln!(out, "failed: {}", failed.join(", "));
    }
    out
}

/// Runs every applicable consistency check. The table is returned together
/// with the pass flag so the caller can print it before choosing the exit
/// status.
pub fn check(problem: &Problem, samples_per_interval: usize) -> Result<(String, bool), CliError> {
    let opts = CheckOptions {
        tol: problem.tol,
        tail_fraction: problem.tail_fraction,
        samples_per_interval,
        ..CheckOptions::default()
    };
    let result = check_instance(&problem.spec, opts)?;
    Ok((check_table(&result), result.passed()))
}
