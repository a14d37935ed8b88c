//! Checkers for the expansiveness-type hypotheses.
//!
//! Every inequality `f(d_lhs) >= f(d_rhs)^eta` is evaluated in the
//! `ln log f` domain (see [`crate::growth`]). Enumerable spaces are scanned
//! exhaustively in canonical order, so the reported witness is the
//! canonically first violation; intervals are sampled with a recorded seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{expansive_holds, GrowthFunction};
use crate::mapping::{Mapping, RightInverse};
use crate::report::{CheckReport, Coverage, InequalityWitness, Witness};
use crate::space::{seeded_rng, PartialOrder, Point, Space};

/// Default number of sampled pairs on intervals.
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Depths up to this size are scanned exhaustively by [`search_violation`].
const SEARCH_EXHAUSTIVE_DEPTH: u64 = 256;
const SEARCH_SAMPLES_PER_LEVEL: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

/// Space, mappings and growth data for one expansiveness question.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansiveProblem {
    pub space: Space,
    pub order: Option<PartialOrder>,
    pub u: Mapping,
    pub v: Option<Mapping>,
    pub growth: GrowthFunction,
    eta: f64,
    pub sampling: Sampling,
}

impl ExpansiveProblem {
    pub fn new(space: Space, u: Mapping, growth: GrowthFunction, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 1.0) {
            return Err(Error::InvalidEta(eta));
        }
        u.check_compatible(&space)?;
        growth.validate()?;
        Ok(ExpansiveProblem {
            space,
            order: None,
            u,
            v: None,
            growth,
            eta,
            sampling: Sampling::default(),
        })
    }

    pub fn with_order(mut self, order: PartialOrder) -> Result<Self> {
        order.check_compatible(&self.space)?;
        self.order = Some(order);
        Ok(self)
    }

    pub fn with_v(mut self, v: Mapping) -> Result<Self> {
        v.check_compatible(&self.space)?;
        self.v = Some(v);
        Ok(self)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The same problem with a different `eta` (must still exceed 1).
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 1.0) {
            return Err(Error::InvalidEta(eta));
        }
        Ok(ExpansiveProblem { eta, ..self.clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `f(d(Ux,Uz)) >= f(d(x,z))^eta` on `x ≼ z`, `d(Ux,Uz) > 0`.
    PhiExpansive,
    /// `d(Ux,Uz) >= q d(x,z)` with `q = eta`.
    Wang,
    /// `f(d(Ux,Uz)) >= f(min{d(x,z), d(x,Ux), d(z,Uz)})^eta` on non-fixed
    /// `x, z` with `Ux != Uz`.
    MinCondition,
    /// `f(d(Ux,Uz)) >= f(d(Vx,Vz))^eta` on `Vx != Vz`.
    Jungck,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::PhiExpansive => "phi-expansive",
            Condition::Wang => "wang expansive",
            Condition::MinCondition => "min condition",
            Condition::Jungck => "jungck condition",
        }
    }
}

enum PairEval {
    /// Outside the hypothesis set.
    Excluded,
    /// In scope but not evaluable.
    Skipped,
    Holds,
    Violated(InequalityWitness),
}

/// How the candidate pairs of a condition are generated.
#[derive(Clone, Copy)]
enum PairShape {
    /// `(x, z)` with `x ≼ z` (diagonal included).
    Ordered,
    /// `(x, z)` with `x` strictly before `z` canonically, or `x ≺ z` when an
    /// order restricts the pairs.
    Distinct,
}

fn shape(cond: Condition) -> PairShape {
    match cond {
        Condition::PhiExpansive => PairShape::Ordered,
        _ => PairShape::Distinct,
    }
}

fn order_for(p: &ExpansiveProblem, cond: Condition) -> Result<Option<&PartialOrder>> {
    match cond {
        Condition::PhiExpansive => p.order.as_ref().map(Some).ok_or(Error::MissingOrder),
        Condition::Wang => Ok(p.order.as_ref()),
        Condition::MinCondition | Condition::Jungck => Ok(None),
    }
}

fn witness(
    p: &ExpansiveProblem,
    x: Point,
    z: Point,
    lhs: f64,
    rhs: f64,
    growth: &GrowthFunction,
) -> InequalityWitness {
    let lhs_log_log = growth.log_log(lhs);
    let rhs_log_log = growth.log_log(rhs);
    InequalityWitness {
        x: p.space.labeled(x),
        z: p.space.labeled(z),
        lhs_distance: lhs,
        rhs_distance: rhs,
        lhs_log: lhs_log_log.exp(),
        rhs_log: rhs_log_log.exp(),
        lhs_log_log,
        rhs_log_log,
        eta: p.eta,
    }
}

fn evaluate(p: &ExpansiveProblem, cond: Condition, x: Point, z: Point) -> PairEval {
    let s = &p.space;
    let u = &p.u;
    let (ux, uz) = (u.apply(&x), u.apply(&z));
    let lhs = s.distance(&ux, &uz);
    match cond {
        Condition::PhiExpansive => {
            if s.is_zero_distance(lhs) {
                return PairEval::Excluded;
            }
            let rhs = s.distance(&x, &z);
            if s.is_zero_distance(rhs) {
                return PairEval::Skipped;
            }
            if expansive_holds(&p.growth, lhs, rhs, p.eta) {
                PairEval::Holds
            } else {
                PairEval::Violated(witness(p, x, z, lhs, rhs, &p.growth))
            }
        }
        Condition::Wang => {
            let rhs = s.distance(&x, &z);
            if s.is_zero_distance(rhs) {
                return PairEval::Excluded;
            }
            // linear domain, independent of the log-domain route
            let q = p.eta;
            if lhs >= q * rhs * (1.0 - crate::growth::LOG_SLACK) {
                PairEval::Holds
            } else {
                PairEval::Violated(witness(p, x, z, lhs, rhs, &GrowthFunction::ExpT))
            }
        }
        Condition::MinCondition => {
            let dx = s.distance(&x, &ux);
            let dz = s.distance(&z, &uz);
            if s.is_zero_distance(dx) || s.is_zero_distance(dz) || s.is_zero_distance(lhs) {
                return PairEval::Excluded;
            }
            let m = s.distance(&x, &z).min(dx).min(dz);
            if s.is_zero_distance(m) {
                return PairEval::Skipped;
            }
            if expansive_holds(&p.growth, lhs, m, p.eta) {
                PairEval::Holds
            } else {
                PairEval::Violated(witness(p, x, z, lhs, m, &p.growth))
            }
        }
        Condition::Jungck => {
            let v = p.v.as_ref().expect("jungck evaluation without V");
            let rhs = s.distance(&v.apply(&x), &v.apply(&z));
            if s.is_zero_distance(rhs) {
                return PairEval::Excluded;
            }
            if expansive_holds(&p.growth, lhs, rhs, p.eta) {
                PairEval::Holds
            } else {
                PairEval::Violated(witness(p, x, z, lhs, rhs, &p.growth))
            }
        }
    }
}

/// Re-evaluates `cond` at `(x, z)`; returns the witness when the inequality
/// is violated there. Used to confirm that a reported witness reproduces.
pub fn reevaluate(p: &ExpansiveProblem, cond: Condition, x: Point, z: Point) -> Option<InequalityWitness> {
    match evaluate(p, cond, x, z) {
        PairEval::Violated(w) => Some(w),
        _ => None,
    }
}

struct Tally {
    examined: u64,
    excluded: u64,
    skipped: u64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            examined: 0,
            excluded: 0,
            skipped: 0,
        }
    }

    /// Records one candidate; returns the witness on a violation.
    fn record(&mut self, e: PairEval) -> Option<InequalityWitness> {
        match e {
            PairEval::Excluded => self.excluded += 1,
            PairEval::Skipped => self.skipped += 1,
            PairEval::Holds => self.examined += 1,
            PairEval::Violated(w) => {
                self.examined += 1;
                return Some(w);
            }
        }
        None
    }

    fn report(self, name: &str, coverage: Coverage, w: Option<InequalityWitness>) -> CheckReport {
        let mut r = match w {
            Some(w) => CheckReport::fail(name, coverage, Witness::Inequality(w)),
            None => CheckReport::pass(name, coverage),
        };
        r.pairs_examined = self.examined;
        r.excluded = self.excluded;
        r.skipped = self.skipped;
        r
    }
}

/// Orients a sampled pair for `shape`, or drops it.
fn orient(space: &Space, order: Option<&PartialOrder>, shape: PairShape, a: Point, b: Point) -> Option<(Point, Point)> {
    match order {
        Some(o) => {
            if o.le(space, &a, &b) {
                Some((a, b))
            } else if o.le(space, &b, &a) {
                Some((b, a))
            } else {
                None
            }
        }
        None => Some(if b < a { (b, a) } else { (a, b) }),
    }
    .filter(|(x, z)| matches!(shape, PairShape::Ordered) || x != z)
}

/// Scans the candidate pairs of `cond` over an explicit enumeration.
fn scan_enumerated(p: &ExpansiveProblem, cond: Condition, pts: &[Point], tally: &mut Tally) -> Result<Option<InequalityWitness>> {
    let order = order_for(p, cond)?;
    let shape = shape(cond);
    let n = pts.len();
    for i in 0..n {
        let start = match (shape, order) {
            (PairShape::Distinct, None) => i + 1,
            _ => 0,
        };
        for j in start..n {
            let (x, z) = (pts[i], pts[j]);
            if let Some(o) = order {
                if !o.le(&p.space, &x, &z) {
                    continue;
                }
                if matches!(shape, PairShape::Distinct) && i == j {
                    continue;
                }
            }
            if let Some(w) = tally.record(evaluate(p, cond, x, z)) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn scan_sampled(p: &ExpansiveProblem, cond: Condition, samples: usize, seed: u64, tally: &mut Tally) -> Result<Option<InequalityWitness>> {
    let order = order_for(p, cond)?;
    let shape = shape(cond);
    let mut rng = seeded_rng(seed);
    for _ in 0..samples {
        let a = p.space.sample_point(&mut rng);
        let b = p.space.sample_point(&mut rng);
        let Some((x, z)) = orient(&p.space, order, shape, a, b) else {
            tally.excluded += 1;
            continue;
        };
        if let Some(w) = tally.record(evaluate(p, cond, x, z)) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn run_condition(p: &ExpansiveProblem, cond: Condition) -> Result<CheckReport> {
    let mut tally = Tally::new();
    match p.space.points() {
        Some(pts) => {
            let w = scan_enumerated(p, cond, &pts, &mut tally)?;
            Ok(tally.report(cond.name(), Coverage::Exhaustive, w))
        }
        None => {
            let Sampling { samples, seed } = p.sampling;
            let w = scan_sampled(p, cond, samples, seed, &mut tally)?;
            Ok(tally.report(cond.name(), Coverage::Sampled { seed, samples }, w))
        }
    }
}

/// Checks `log f(d(Ux,Uz)) >= eta log f(d(x,z))` for every `(x, z)` with
/// `x ≼ z` and `d(Ux,Uz) > 0`.
pub fn check_phi_expansive(p: &ExpansiveProblem) -> Result<CheckReport> {
    run_condition(p, Condition::PhiExpansive)
}

/// Checks `d(Ux,Uz) >= q d(x,z)` for all distinct pairs, or for the pairs
/// `x ≺ z` when `order` is given.
pub fn check_wang_expansive(u: &Mapping, space: &Space, q: f64, order: Option<&PartialOrder>, sampling: Sampling) -> Result<CheckReport> {
    let mut p = ExpansiveProblem::new(space.clone(), u.clone(), GrowthFunction::ExpT, q)?.with_sampling(sampling);
    if let Some(o) = order {
        p = p.with_order(o.clone())?;
    }
    run_condition(&p, Condition::Wang)
}

/// Checks the min-type condition over pairs of non-fixed points with
/// `Ux != Uz`. Pairs whose min argument is zero are counted as skipped.
pub fn check_min_condition(p: &ExpansiveProblem) -> Result<CheckReport> {
    run_condition(p, Condition::MinCondition)
}

fn uncovered_image(u: &Mapping, v: &Mapping, space: &Space) -> Result<Option<(Point, Point)>> {
    let pts = match space {
        Space::RealInterval { a, b } => vec![Point::real(*a), Point::real(*b)],
        _ => space.enumerate()?,
    };
    Ok(pts.into_iter().map(|x| (x, v.apply(&x))).find(|(_, vx)| u.least_preimage(space, vx).is_none()))
}

/// Verifies `V(M) ⊆ U(M)`: every enumerated `Vx` (on intervals, the images
/// of the endpoints, which bound the image of a monotone map) must have a
/// `U`-preimage.
pub fn check_containment(u: &Mapping, v: &Mapping, space: &Space) -> Result<()> {
    match uncovered_image(u, v, space)? {
        None => Ok(()),
        Some((x, vx)) => Err(Error::ContainmentViolated {
            point: space.label(&x),
            image: space.label(&vx),
        }),
    }
}

/// [`check_containment`] as a report; the witness is the uncovered image.
pub fn verify_containment(u: &Mapping, v: &Mapping, space: &Space) -> Result<CheckReport> {
    const NAME: &str = "containment";
    let coverage = match space {
        Space::RealInterval { .. } => Coverage::Grid { points: 2 },
        _ => Coverage::Exhaustive,
    };
    let mut r = match uncovered_image(u, v, space)? {
        None => CheckReport::pass(NAME, coverage),
        Some((x, vx)) => CheckReport::fail(
            NAME,
            coverage,
            Witness::Uncovered {
                points: vec![space.labeled(vx)],
            },
        )
        .with_note(format!("V({}) = {} has no U-preimage", space.label(&x), space.label(&vx))),
    };
    r.pairs_examined = match space {
        Space::RealInterval { .. } => 2,
        _ => space.len().unwrap_or(0) as u64,
    };
    Ok(r)
}

/// Checks `log f(d(Ux,Uz)) >= eta log f(d(Vx,Vz))` over pairs with
/// `Vx != Vz`, after verifying `V(M) ⊆ U(M)`.
pub fn check_jungck_condition(p: &ExpansiveProblem) -> Result<CheckReport> {
    let v = p.v.as_ref().ok_or(Error::MissingMapping)?;
    check_containment(&p.u, v, &p.space)?;
    Ok(run_condition(p, Condition::Jungck)?.with_note("containment V(M) ⊆ U(M): verified"))
}

/// PASS iff `x ≼ z` implies `U*x ≼ U*z` for all enumerated pairs.
pub fn check_increasing(ustar: &RightInverse, order: &PartialOrder, space: &Space) -> Result<CheckReport> {
    const NAME: &str = "right inverse increasing";
    order.check_compatible(space)?;
    let pts = space.enumerate()?;
    let mut examined = 0;
    for &x in &pts {
        for &z in &pts {
            if !order.le(space, &x, &z) {
                continue;
            }
            examined += 1;
            let (ix, iz) = (ustar.apply(&x)?, ustar.apply(&z)?);
            if !order.le(space, &ix, &iz) {
                let mut r = CheckReport::fail(
                    NAME,
                    Coverage::Exhaustive,
                    Witness::NotIncreasing {
                        x: space.labeled(x),
                        z: space.labeled(z),
                        image_x: space.labeled(ix),
                        image_z: space.labeled(iz),
                    },
                );
                r.pairs_examined = examined;
                return Ok(r);
            }
        }
    }
    let mut r = CheckReport::pass(NAME, Coverage::Exhaustive);
    r.pairs_examined = examined;
    Ok(r)
}

/// Runs the checker for `cond` on `p`.
pub fn check_condition(p: &ExpansiveProblem, cond: Condition) -> Result<CheckReport> {
    match cond {
        Condition::PhiExpansive => check_phi_expansive(p),
        Condition::Wang => {
            check_wang_expansive(&p.u, &p.space, p.eta, p.order.as_ref(), p.sampling)
        }
        Condition::MinCondition => check_min_condition(p),
        Condition::Jungck => check_jungck_condition(p),
    }
}

/// Counterexample search with escalating density.
///
/// Shrinking-fractions spaces are truncated at depths 16, 32, 64, ... up to
/// `budget`; depths up to 256 are scanned exhaustively and deeper levels
/// with 4096 seeded samples each. Intervals use sample counts 256, 512, ...
/// up to `budget`. Finite tabulated spaces are scanned exhaustively once.
/// Returns FAIL with the first witness found, or PASS at budget.
pub fn search_violation(p: &ExpansiveProblem, cond: Condition, budget: u64) -> Result<CheckReport> {
    let name = format!("search: {}", cond.name());
    let seed = p.sampling.seed;
    if cond == Condition::Jungck {
        let v = p.v.as_ref().ok_or(Error::MissingMapping)?;
        check_containment(&p.u, v, &p.space)?;
    }
    order_for(p, cond)?;
    let budget = budget.max(1);

    let mut levels = Vec::new();
    let mut k = 16u64;
    while k < budget {
        levels.push(k);
        k = k.saturating_mul(2);
    }
    levels.push(budget);

    let mut tally = Tally::new();
    let mut done = 0usize;
    let mut reached = 0u64;
    let mut found = None;
    match &p.space {
        Space::Finite(_) => {
            found = scan_enumerated(p, cond, &p.space.enumerate()?, &mut tally)?;
            done = 1;
            reached = p.space.len().unwrap_or(0) as u64;
        }
        Space::ShrinkingFractions { .. } => {
            for (i, &depth) in levels.iter().enumerate() {
                let sub = ExpansiveProblem {
                    space: Space::shrinking_fractions(depth)?,
                    ..p.clone()
                };
                done += 1;
                reached = depth;
                found = if depth <= SEARCH_EXHAUSTIVE_DEPTH {
                    scan_enumerated(&sub, cond, &sub.space.enumerate()?, &mut tally)?
                } else {
                    scan_sampled(&sub, cond, SEARCH_SAMPLES_PER_LEVEL, seed.wrapping_add(i as u64), &mut tally)?
                };
                if found.is_some() {
                    break;
                }
            }
        }
        Space::RealInterval { .. } => {
            let mut n = 256u64;
            let mut i = 0u64;
            loop {
                let samples = n.min(budget);
                done += 1;
                reached = samples;
                found = scan_sampled(p, cond, samples as usize, seed.wrapping_add(i), &mut tally)?;
                if found.is_some() || samples >= budget {
                    break;
                }
                n = n.saturating_mul(2);
                i += 1;
            }
        }
    }
    let coverage = Coverage::Search {
        seed,
        levels: done,
        reached,
        budget,
    };
    let passed = found.is_none();
    let r = tally.report(&name, coverage, found);
    Ok(if passed { r.with_note("no violation found within budget") } else { r })
}
