//! Commands behind the CLI and their run reports.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checks::{
    check_condition, check_increasing, search_violation, verify_containment, Condition,
};
use crate::error::{Error, Result};
use crate::growth::{classify_theta, default_probe_scales, default_r_grid, ThetaClassification};
use crate::mapping::{build_right_inverse, verify_right_inverse, verify_surjective, verify_weak_compatibility};
use crate::report::CheckReport;
use crate::solve::{
    cauchy_diagnostics, enumerate_fixed_points, solve_common, solve_ordered, solve_preimage, CauchyDiagnostics,
    IterationTrace, TraceSummary,
};
use crate::space::{verify_metric_axioms, Label};
use crate::spec::{Problem, ProblemSpec, Theorem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub name: String,
    pub summary: TraceSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<CauchyDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonPoint {
    pub u: String,
    pub w: String,
    pub residual_u: f64,
    pub residual_v: f64,
}

/// An expected outcome next to the observed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub item: String,
    pub expected: String,
    pub actual: String,
    pub matches: bool,
}

impl Comparison {
    pub fn new(item: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        let (expected, actual) = (expected.into(), actual.into());
        Comparison {
            item: item.into(),
            matches: expected == actual,
            expected,
            actual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub timestamp: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ProblemSpec>,
    #[serde(default)]
    pub checks: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta: Vec<ThetaClassification>,
    #[serde(default)]
    pub traces: Vec<TraceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub common: Option<CommonPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<Comparison>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub verdict: RunVerdict,
}

impl RunReport {
    pub fn new(command: &str, spec: Option<ProblemSpec>) -> Self {
        RunReport {
            timestamp: chrono::Utc::now().to_rfc3339(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            spec,
            checks: Vec::new(),
            theta: Vec::new(),
            traces: Vec::new(),
            common: None,
            fixed_points: None,
            comparisons: Vec::new(),
            errors: Vec::new(),
            notes: Vec::new(),
            verdict: RunVerdict::Success,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.verdict == RunVerdict::Success
    }

    /// 0 on success, 1 on a mathematical failure.
    pub fn exit_code(&self) -> i32 {
        if self.succeeded() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecParse {
            path: "<report>".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == name)
    }

    /// Check verdicts in order, for comparing reruns.
    pub fn verdicts(&self) -> Vec<(String, bool)> {
        self.checks.iter().map(|c| (c.check.clone(), c.passed())).collect()
    }

    fn fail_with(&mut self, e: &Error) {
        self.errors.push(e.to_string());
        self.verdict = RunVerdict::Failure;
    }

    fn push_check(&mut self, c: CheckReport) {
        if !c.passed() {
            self.verdict = RunVerdict::Failure;
        }
        self.checks.push(c);
    }

    /// Re-derives the verdict from checks, traces, comparisons and errors.
    fn settle(&mut self) {
        let ok = self.checks.iter().all(CheckReport::passed)
            && self.traces.iter().all(|t| t.summary.verdict == crate::solve::TraceVerdict::Converged)
            && self.comparisons.iter().all(|c| c.matches)
            && self.errors.is_empty();
        self.verdict = if ok { RunVerdict::Success } else { RunVerdict::Failure };
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (expansive {})", self.command, self.version)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for t in &self.theta {
            let limit = match t.limit {
                Some(crate::growth::Limit::Finite(l)) => format!("{l:.4}"),
                Some(crate::growth::Limit::Infinite) => "inf".into(),
                None => "-".into(),
            };
            let r = t.exponent.map_or("-".into(), |r| format!("{r}"));
            writeln!(
                f,
                "theta {:<18} theta1 {:?}  theta2 {:?}  theta3 {:?}  r = {r}  l = {limit}",
                t.growth, t.theta1, t.theta2, t.theta3
            )?;
        }
        for t in &self.traces {
            let s = &t.summary;
            writeln!(
                f,
                "trace {}: {:?} after {} iterations, final point {}, residual {:e}",
                t.name, s.verdict, s.iterations, s.final_point, s.residual
            )?;
            if let Some(c) = &t.cauchy {
                writeln!(
                    f,
                    "  cauchy window {}: diameter {:e}, tail {:e} vs {:e}{}",
                    c.window,
                    c.window_diameter,
                    c.tail_diameter,
                    c.previous_tail_diameter,
                    if c.not_cauchy_like { " (not Cauchy-like)" } else { "" }
                )?;
            }
        }
        if let Some(c) = &self.common {
            writeln!(
                f,
                "common fixed point u = {} (w = {}), d(Uu,u) = {:e}, d(Vu,u) = {:e}",
                c.u, c.w, c.residual_u, c.residual_v
            )?;
        }
        if let Some(fp) = &self.fixed_points {
            writeln!(f, "fixed points of U: {{{}}}", fp.join(", "))?;
        }
        for c in &self.comparisons {
            writeln!(
                f,
                "[{}] {}: expected {}, got {}",
                if c.matches { "ok" } else { "MISMATCH" },
                c.item,
                c.expected,
                c.actual
            )?;
        }
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "verdict: {}", if self.succeeded() { "SUCCESS" } else { "FAILURE" })
    }
}

/// Command-line values that take precedence over the spec file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub theorem: Option<Theorem>,
    pub eta: Option<f64>,
    pub x0: Option<String>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ProblemSpec) {
        if let Some(t) = self.theorem {
            spec.theorem = t;
        }
        if let Some(e) = self.eta {
            spec.eta = e;
        }
        if let Some(x) = &self.x0 {
            spec.x0 = Some(Label::Name(x.clone()));
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.tol {
            spec.solver.tol = t;
        }
        if let Some(m) = self.max_iter {
            spec.solver.max_iter = m;
        }
    }
}

/// The condition a theorem imposes on its maps.
pub fn condition_for(theorem: Theorem) -> Condition {
    match theorem {
        Theorem::Ordered => Condition::PhiExpansive,
        Theorem::Min => Condition::MinCondition,
        Theorem::Common => Condition::Jungck,
    }
}

fn theta_of(p: &Problem) -> ThetaClassification {
    classify_theta(&p.expansive.growth, &default_probe_scales(), &default_r_grid())
}

/// Runs every checker that applies to the selected theorem.
pub fn cmd_check(spec: &ProblemSpec) -> Result<RunReport> {
    let p = spec.build()?;
    let mut report = RunReport::new("check", Some(spec.clone()));
    run_checks(&p, &mut report)?;
    report.theta.push(theta_of(&p));
    report.settle();
    Ok(report)
}

fn run_checks(p: &Problem, report: &mut RunReport) -> Result<()> {
    let e = &p.expansive;
    let space = &e.space;
    report.push_check(verify_metric_axioms(space, e.sampling.samples, e.sampling.seed)?);
    match p.spec.theorem {
        Theorem::Ordered => {
            let order = e.order.as_ref().ok_or(Error::MissingOrder)?;
            if space.is_enumerable() {
                report.push_check(crate::space::verify_order_axioms(space, order)?);
            } else {
                report.notes.push("order axioms not checked: the space is not enumerable".into());
            }
            let surj = verify_surjective(&e.u, space)?;
            let surjective = surj.passed();
            report.push_check(surj);
            if surjective {
                let ustar = build_right_inverse(&e.u, space)?;
                report.push_check(verify_right_inverse(&ustar, space)?);
                if space.is_enumerable() {
                    report.push_check(check_increasing(&ustar, order, space)?);
                } else {
                    report
                        .notes
                        .push("right inverse monotonicity not checked: the space is not enumerable".into());
                }
            }
            report.push_check(check_condition(e, Condition::PhiExpansive)?);
        }
        Theorem::Min => {
            report.push_check(verify_surjective(&e.u, space)?);
            report.push_check(check_condition(e, Condition::MinCondition)?);
        }
        Theorem::Common => {
            let v = e.v.as_ref().ok_or(Error::MissingMapping)?;
            let contained = verify_containment(&e.u, v, space)?;
            let ok = contained.passed();
            report.push_check(contained);
            if ok {
                report.push_check(check_condition(e, Condition::Jungck)?);
            }
            report.push_check(verify_weak_compatibility(&e.u, v, space)?);
        }
    }
    Ok(())
}

fn record_trace(report: &mut RunReport, p: &Problem, name: &str, trace: &IterationTrace, out: Option<&Path>) -> Result<()> {
    let space = p.space();
    let cauchy = cauchy_diagnostics(trace, space, p.solver.cauchy_window).ok();
    if cauchy.is_none() {
        report.notes.push(format!(
            "{name}: trace shorter than the Cauchy window ({} points)",
            trace.points.len()
        ));
    }
    if let Some(dir) = out {
        trace.export(space, dir, name)?;
    }
    report.traces.push(TraceRecord {
        name: name.to_string(),
        summary: trace.summary(space),
        cauchy,
    });
    Ok(())
}

/// Runs the iteration for the selected theorem.
///
/// With `strict`, the hypothesis checks run first and any FAIL stops the
/// run before solving. Traces are written to `out` when given.
pub fn cmd_solve(spec: &ProblemSpec, strict: bool, out: Option<&Path>) -> Result<RunReport> {
    let p = spec.build()?;
    let mut report = RunReport::new("solve", Some(spec.clone()));
    if strict {
        run_checks(&p, &mut report)?;
        if !report.succeeded() {
            report.notes.push("strict mode: hypotheses failed, solver not run".into());
            return Ok(report);
        }
    }
    let x0 = p
        .x0
        .ok_or_else(|| Error::InvalidConfig("solve needs a start point (x0)".into()))?;
    let e = &p.expansive;
    let space = &e.space;
    let outcome: Result<()> = (|| {
        match spec.theorem {
            Theorem::Ordered => {
                let order = e.order.as_ref().ok_or(Error::MissingOrder)?;
                let ustar = build_right_inverse(&e.u, space)?;
                let trace = solve_ordered(&e.u, &ustar, x0, order, space, &p.solver)?;
                record_trace(&mut report, &p, "ordered", &trace, out)?;
            }
            Theorem::Min => {
                let trace = solve_preimage(&e.u, x0, space, &p.solver)?;
                record_trace(&mut report, &p, "preimage", &trace, out)?;
            }
            Theorem::Common => {
                let v = e.v.as_ref().ok_or(Error::MissingMapping)?;
                let sol = solve_common(&e.u, v, x0, space, &p.solver)?;
                record_trace(&mut report, &p, "common", &sol.trace, out)?;
                report.common = Some(CommonPoint {
                    u: space.label(&sol.u),
                    w: space.label(&sol.w),
                    residual_u: sol.residual_u,
                    residual_v: sol.residual_v,
                });
            }
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => {}
        Err(Error::NonMonotoneTrace { step, trace }) => {
            let e = Error::NonMonotoneTrace {
                step,
                trace: trace.clone(),
            };
            record_trace(&mut report, &p, "stalled", &trace, out)?;
            report.fail_with(&e);
        }
        Err(e) if e.exit_code() == 1 => report.fail_with(&e),
        Err(e) => return Err(e),
    }

    let tol = p.solver.tol;
    let fps = enumerate_fixed_points(&e.u, space, tol * 10.0)?;
    if let Some(t) = report.traces.first() {
        if t.summary.verdict == crate::solve::TraceVerdict::Converged && space.is_enumerable() {
            let last = space.parse_point(&t.summary.final_point)?;
            let member = fps.contains(&last) || spec.theorem == Theorem::Common;
            if !member {
                report.notes.push(format!(
                    "converged point {} is not among the enumerated fixed points",
                    t.summary.final_point
                ));
            }
        }
    }
    report.fixed_points = Some(fps.iter().map(|x| space.label(x)).collect());
    report.settle();
    Ok(report)
}

/// Counterexample search for the theorem's condition (or `condition`).
pub fn cmd_falsify(spec: &ProblemSpec, condition: Option<Condition>, budget: u64) -> Result<RunReport> {
    let p = spec.build()?;
    let cond = condition.unwrap_or_else(|| condition_for(spec.theorem));
    let mut report = RunReport::new("falsify", Some(spec.clone()));
    report.push_check(search_violation(&p.expansive, cond, budget)?);
    report.settle();
    Ok(report)
}
