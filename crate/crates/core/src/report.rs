//! Check outcomes shared by every hypothesis checker.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::space::{Point, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// How much of the hypothesis set a check covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Coverage {
    /// Every enumerated point, pair or triple was examined.
    Exhaustive,
    /// Independently drawn samples from a seeded generator.
    Sampled { seed: u64, samples: usize },
    /// A uniform grid over an interval (advisory evidence only).
    Grid { points: usize },
    /// Escalating search; `reached` is the final truncation depth or sample count.
    Search {
        seed: u64,
        levels: usize,
        reached: u64,
        budget: u64,
    },
}

/// A point together with its human-readable label in its space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub id: Point,
    pub label: String,
}

impl LabeledPoint {
    pub fn new(space: &Space, p: Point) -> Self {
        LabeledPoint {
            id: p,
            label: space.label(&p),
        }
    }
}

impl fmt::Display for LabeledPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// A violated instance of `log f(lhs_distance) >= eta * log f(rhs_distance)`.
///
/// `lhs_log`/`rhs_log` are the log-growth values; the `_log_log` fields are
/// their natural logs, which is the domain in which the comparison is made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityWitness {
    pub x: LabeledPoint,
    pub z: LabeledPoint,
    pub lhs_distance: f64,
    pub rhs_distance: f64,
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub lhs_log_log: f64,
    pub rhs_log_log: f64,
    pub eta: f64,
}

impl InequalityWitness {
    /// `lhs_distance / rhs_distance`, the expansion ratio at the witness.
    pub fn ratio(&self) -> f64 {
        self.lhs_distance / self.rhs_distance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    MetricAxiom {
        axiom: String,
        points: Vec<LabeledPoint>,
    },
    OrderAxiom {
        axiom: String,
        points: Vec<LabeledPoint>,
    },
    Uncovered {
        points: Vec<LabeledPoint>,
    },
    Inequality(InequalityWitness),
    NotIncreasing {
        x: LabeledPoint,
        z: LabeledPoint,
        image_x: LabeledPoint,
        image_z: LabeledPoint,
    },
    NotCommuting {
        point: LabeledPoint,
        uv: LabeledPoint,
        vu: LabeledPoint,
    },
    NotRightInverse {
        point: LabeledPoint,
        composed: LabeledPoint,
    },
}

impl Witness {
    pub fn as_inequality(&self) -> Option<&InequalityWitness> {
        match self {
            Witness::Inequality(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ps: &[LabeledPoint]| {
            ps.iter()
                .map(|p| p.label.clone())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Witness::MetricAxiom { axiom, points } | Witness::OrderAxiom { axiom, points } => {
                write!(f, "{axiom} violated at ({})", join(points))
            }
            Witness::Uncovered { points } => write!(f, "no preimage for {}", join(points)),
            Witness::Inequality(w) => write!(
                f,
                "x = {}, z = {}: d_lhs = {:.6e}, d_rhs = {:.6e}, ln log f: {:.6e} < ln(eta) + {:.6e}",
                w.x, w.z, w.lhs_distance, w.rhs_distance, w.lhs_log_log, w.rhs_log_log
            ),
            Witness::NotIncreasing {
                x,
                z,
                image_x,
                image_z,
            } => write!(f, "{x} <= {z} but {image_x} is not <= {image_z}"),
            Witness::NotCommuting { point, uv, vu } => {
                write!(f, "at {point}: UV = {uv}, VU = {vu}")
            }
            Witness::NotRightInverse { point, composed } => {
                write!(f, "U(U*({point})) = {composed}")
            }
        }
    }
}

/// Outcome of a hypothesis check.
///
/// `excluded` counts candidates outside the hypothesis set (e.g. pairs with
/// `d(Ux, Uz) = 0`); `skipped` counts in-scope candidates at which the
/// inequality cannot be evaluated (e.g. a zero argument to the growth
/// function).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub pairs_examined: u64,
    pub excluded: u64,
    pub skipped: u64,
    pub coverage: Coverage,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn pass(check: impl Into<String>, coverage: Coverage) -> Self {
        CheckReport {
            check: check.into(),
            verdict: Verdict::Pass,
            pairs_examined: 0,
            excluded: 0,
            skipped: 0,
            coverage,
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn fail(check: impl Into<String>, coverage: Coverage, witness: Witness) -> Self {
        CheckReport {
            verdict: Verdict::Fail,
            witness: Some(witness),
            ..CheckReport::pass(check, coverage)
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        let coverage = match &self.coverage {
            Coverage::Exhaustive => "exhaustive".to_string(),
            Coverage::Sampled { seed, samples } => format!("{samples} samples, seed {seed}"),
            Coverage::Grid { points } => format!("grid of {points}"),
            Coverage::Search {
                levels,
                reached,
                budget,
                ..
            } => format!("search: {levels} levels, reached {reached} of budget {budget}"),
        };
        write!(
            f,
            "[{verdict}] {} ({coverage}; examined {}, excluded {}, skipped {})",
            self.check, self.pairs_examined, self.excluded, self.skipped
        )?;
        if let Some(w) = &self.witness {
            write!(f, "\n    witness: {w}")?;
        }
        for n in &self.notes {
            write!(f, "\n    note: {n}")?;
        }
        Ok(())
    }
}
