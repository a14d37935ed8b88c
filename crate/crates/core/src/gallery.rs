//! Built-in worked examples, each run end to end against its expected
//! outcomes.

use crate::checks::{check_condition, check_wang_expansive, Condition, ExpansiveProblem, Sampling};
use crate::error::{Error, Result};
use crate::growth::{classify_theta, default_probe_scales, default_r_grid, GrowthFunction, Limit, ThetaStatus};
use crate::mapping::{coincidence_points, Mapping};
use crate::report::{CheckReport, Verdict};
use crate::run::{cmd_check, cmd_solve, Comparison, RunReport};
use crate::solve::{solve_preimage, SolverConfig};
use crate::space::{PartialOrder, Point, Space};
use crate::spec::{MappingSpec, OrderSpec, ProblemSpec, SolverSpec, SpaceSpec, Theorem};

pub const GALLERY: [&str; 4] = ["example1", "example2", "wang_linear", "theta_profile"];

/// Shrinking fractions at depth 64 with the shift map and `exp(exp(-1/t))`.
pub fn example1_spec(eta: f64) -> ProblemSpec {
    ProblemSpec {
        space: SpaceSpec::ShrinkingFractions { depth: 64 },
        order: Some(OrderSpec::Example1),
        u: MappingSpec::Example1Shift,
        v: None,
        growth: GrowthFunction::Example1,
        eta,
        theorem: Theorem::Ordered,
        x0: Some(crate::space::Label::Value(0.0)),
        solver: SolverSpec::default(),
        seed: crate::checks::DEFAULT_SEED,
        samples: crate::checks::DEFAULT_SAMPLES,
    }
}

/// `Ux = x/4`, `Vx = x/12` on `[0, 1]` with `e^t`.
pub fn example2_spec(eta: f64) -> ProblemSpec {
    ProblemSpec {
        space: SpaceSpec::RealInterval { a: 0.0, b: 1.0 },
        order: None,
        u: MappingSpec::Linear { slope: 0.25 },
        v: Some(MappingSpec::Linear { slope: 1.0 / 12.0 }),
        growth: GrowthFunction::ExpT,
        eta,
        theorem: Theorem::Common,
        x0: Some(crate::space::Label::Value(1.0)),
        solver: SolverSpec::default(),
        seed: crate::checks::DEFAULT_SEED,
        samples: crate::checks::DEFAULT_SAMPLES,
    }
}

/// `Ux = 2x` on `[0, 1]` with `e^t`, ordered by `<=`.
pub fn wang_linear_spec(eta: f64) -> ProblemSpec {
    ProblemSpec {
        space: SpaceSpec::RealInterval { a: 0.0, b: 1.0 },
        order: Some(OrderSpec::Usual),
        u: MappingSpec::Linear { slope: 2.0 },
        v: None,
        growth: GrowthFunction::ExpT,
        eta,
        theorem: Theorem::Min,
        x0: Some(crate::space::Label::Value(1.0)),
        solver: SolverSpec::default(),
        seed: crate::checks::DEFAULT_SEED,
        samples: crate::checks::DEFAULT_SAMPLES,
    }
}

pub fn cmd_gallery(name: &str) -> Result<RunReport> {
    let mut report = match name {
        "example1" => example1()?,
        "example2" => example2()?,
        "wang_linear" => wang_linear()?,
        "theta_profile" => theta_profile(),
        other => return Err(Error::UnknownGalleryItem(other.to_string())),
    };
    report.command = format!("gallery {name}");
    let ok = report.checks.iter().all(CheckReport::passed)
        && report.comparisons.iter().all(|c| c.matches)
        && report.errors.is_empty();
    report.verdict = if ok {
        crate::run::RunVerdict::Success
    } else {
        crate::run::RunVerdict::Failure
    };
    Ok(report)
}

fn verdict_str(r: &CheckReport) -> &'static str {
    match r.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    }
}

fn set(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(", "))
}

fn example1() -> Result<RunReport> {
    let mut report = cmd_check(&example1_spec(2.0))?;
    for c in &report.checks {
        report
            .comparisons
            .push(Comparison::new(format!("eta = 2: {}", c.check), "PASS", verdict_str(c)));
    }

    let at3 = cmd_check(&example1_spec(3.0))?;
    let phi3 = at3.check("phi-expansive").expect("ordered checks include phi-expansive");
    report
        .comparisons
        .push(Comparison::new("eta = 3: phi-expansive", "FAIL", verdict_str(phi3)));
    if let Some(w) = &phi3.witness {
        report.notes.push(format!("eta = 3 witness: {w}"));
    }

    let deep = Space::shrinking_fractions(2_000)?;
    let order = PartialOrder::example1();
    for q in [1.001, 1.01, 1.1, 2.0] {
        let r = check_wang_expansive(&Mapping::example1_shift(), &deep, q, Some(&order), Sampling::default())?;
        report
            .comparisons
            .push(Comparison::new(format!("not expansive: q = {q}, depth 2000"), "FAIL", verdict_str(&r)));
        if let Some(w) = r.witness.as_ref().and_then(|w| w.as_inequality()) {
            report.notes.push(format!(
                "q = {q}: d(Ux,Uz)/d(x,z) = {:.6} at x = {}, z = {}",
                w.lhs_distance / w.rhs_distance,
                w.x,
                w.z
            ));
        }
    }

    let solved = cmd_solve(&example1_spec(2.0), false, None)?;
    let final_point = solved
        .traces
        .first()
        .map(|t| t.summary.final_point.clone())
        .unwrap_or_else(|| "-".into());
    report
        .comparisons
        .push(Comparison::new("ordered iteration from 0", "0", final_point));
    report.traces.extend(solved.traces);
    let fps = solved.fixed_points.unwrap_or_default();
    report
        .comparisons
        .push(Comparison::new("fixed points of U", "{0, 1}", set(&fps)));
    report.fixed_points = Some(fps);
    report.notes.push(
        "the stated uniqueness of the fixed point does not hold: U(0) = 0 and U(1) = 1, \
         and 1 is comparable only to itself"
            .into(),
    );

    let space = Space::shrinking_fractions(64)?;
    let cfg = SolverConfig {
        tol: 1e-3,
        ..SolverConfig::default()
    };
    let pre = solve_preimage(&Mapping::example1_shift(), Point::Recip(5), &space, &cfg)?;
    report.comparisons.push(Comparison::new(
        "preimage iteration from 1/5 (tol 1e-3)",
        "converged within 1e-3 of 0",
        if pre.converged() && space.distance(&pre.last(), &Point::Zero) <= cfg.tol {
            "converged within 1e-3 of 0".to_string()
        } else {
            format!("{:?} at {}", pre.verdict, space.label(&pre.last()))
        },
    ));
    report.traces.push(crate::run::TraceRecord {
        name: "preimage from 1/5".into(),
        summary: pre.summary(&space),
        cauchy: None,
    });
    report
        .notes
        .push("only x0 = 0 satisfies x0 <= U*x0, so the ordered iteration is constant".into());
    Ok(report)
}

fn example2() -> Result<RunReport> {
    let mut report = cmd_check(&example2_spec(2.0))?;
    let base = example2_spec(2.0).build()?;
    for (eta, expected) in [(1.5, "PASS"), (2.0, "PASS"), (2.9, "PASS"), (3.1, "FAIL"), (4.0, "FAIL")] {
        let p: ExpansiveProblem = base.expansive.with_eta(eta)?;
        let r = check_condition(&p, Condition::Jungck)?;
        report
            .comparisons
            .push(Comparison::new(format!("jungck condition, eta = {eta}"), expected, verdict_str(&r)));
    }

    let space = base.space().clone();
    let zs = coincidence_points(&base.expansive.u, base.expansive.v.as_ref().unwrap(), &space)?;
    let labels: Vec<String> = zs.iter().map(|z| space.label(z)).collect();
    report
        .comparisons
        .push(Comparison::new("coincidence points", "{0}", set(&labels)));

    let solved = cmd_solve(&example2_spec(2.0), false, None)?;
    let within = |s: &str| s.parse::<f64>().map(|u| u.abs() <= 1e-10).unwrap_or(false);
    let actual = match &solved.common {
        Some(c) if within(&c.u) && c.residual_u <= 1e-10 && c.residual_v <= 1e-10 => "0 (within 1e-10)".to_string(),
        Some(c) => c.u.clone(),
        None => solved.errors.join("; "),
    };
    report
        .comparisons
        .push(Comparison::new("common fixed point from x0 = 1", "0 (within 1e-10)", actual));
    if let Some(t) = solved.traces.first() {
        report.comparisons.push(Comparison::new(
            "iterations to converge",
            "at most 60",
            if t.summary.iterations <= 60 {
                "at most 60".to_string()
            } else {
                t.summary.iterations.to_string()
            },
        ));
    }
    report.traces.extend(solved.traces);
    report.common = solved.common;
    Ok(report)
}

fn wang_linear() -> Result<RunReport> {
    let mut report = cmd_check(&wang_linear_spec(2.0))?;
    let base = wang_linear_spec(2.0).build()?;
    let e = &base.expansive;
    for (q, expected) in [(1.5, "PASS"), (2.0, "PASS"), (2.5, "FAIL"), (3.0, "FAIL")] {
        let wang = check_wang_expansive(&e.u, &e.space, q, e.order.as_ref(), e.sampling)?;
        let phi = check_condition(&e.with_eta(q)?, Condition::PhiExpansive)?;
        report
            .comparisons
            .push(Comparison::new(format!("wang, q = {q}"), expected, verdict_str(&wang)));
        let pair = |r: &CheckReport| {
            r.witness
                .as_ref()
                .and_then(|w| w.as_inequality())
                .map(|w| format!("{} {}", verdict_str(r), (w.x.label.clone() + ", " + &w.z.label)))
                .unwrap_or_else(|| verdict_str(r).to_string())
        };
        report.comparisons.push(Comparison::new(
            format!("phi = e^t, eta = {q} agrees with wang"),
            pair(&wang),
            pair(&phi),
        ));
    }
    let solved = cmd_solve(&wang_linear_spec(2.0), false, None)?;
    let fps = solved.fixed_points.clone().unwrap_or_default();
    report.comparisons.push(Comparison::new("fixed points of U", "{0}", set(&fps)));
    if let Some(t) = solved.traces.first() {
        let at_zero = t.summary.final_point.parse::<f64>().map(|x| x.abs() <= 1e-10).unwrap_or(false);
        report.comparisons.push(Comparison::new(
            "preimage iteration from 1",
            "converged to 0",
            if t.summary.verdict == crate::solve::TraceVerdict::Converged && at_zero {
                "converged to 0".to_string()
            } else {
                format!("{:?} at {}", t.summary.verdict, t.summary.final_point)
            },
        ));
    }
    report.traces.extend(solved.traces);
    report.errors.extend(solved.errors);
    report.fixed_points = Some(fps);
    Ok(report)
}

fn theta_profile() -> RunReport {
    let mut report = RunReport::new("gallery theta_profile", None);
    let expected = [
        ("exp_t", "PASS/PASS/FAIL", None),
        ("exp_sqrt", "PASS/PASS/PASS", Some(0.5)),
        ("example1", "PASS/PASS/FAIL", None),
        ("power_shift(p=0.5)", "PASS/PASS/PASS", Some(0.5)),
    ];
    let status = |s: ThetaStatus| match s {
        ThetaStatus::Pass => "PASS",
        ThetaStatus::Fail => "FAIL",
        ThetaStatus::Inconclusive => "INCONCLUSIVE",
    };
    for (f, (name, verdicts, r)) in GrowthFunction::builtins().iter().zip(expected) {
        let c = classify_theta(f, &default_probe_scales(), &default_r_grid());
        report.comparisons.push(Comparison::new(
            format!("{name}: theta1/theta2/theta3"),
            verdicts,
            format!("{}/{}/{}", status(c.theta1), status(c.theta2), status(c.theta3)),
        ));
        if let Some(r) = r {
            let near_one = matches!(c.limit, Some(Limit::Finite(l)) if (l - 1.0).abs() <= 0.1);
            report.comparisons.push(Comparison::new(
                format!("{name}: exponent and limit"),
                format!("r = {r}, l within 10% of 1"),
                match (c.exponent, near_one) {
                    (Some(e), true) if (e - r).abs() < 1e-9 => format!("r = {r}, l within 10% of 1"),
                    _ => format!("r = {:?}, l = {:?}", c.exponent, c.limit),
                },
            ));
        }
        report.theta.push(c);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_item_matches_expectations() {
        for name in GALLERY {
            let r = cmd_gallery(name).unwrap();
            let bad: Vec<_> = r.comparisons.iter().filter(|c| !c.matches).collect();
            assert!(bad.is_empty(), "{name}: {bad:?}");
            assert!(r.succeeded(), "{name}\n{r}");
        }
    }

    #[test]
    fn unknown_item() {
        assert!(matches!(cmd_gallery("example3"), Err(Error::UnknownGalleryItem(_))));
    }
}
