//! JSON problem descriptions.
//!
//! ```json
//! {
//!   "space": {"kind": "shrinking_fractions", "depth": 64},
//!   "order": {"kind": "example1"},
//!   "u": {"kind": "example1_shift"},
//!   "growth": {"name": "example1"},
//!   "eta": 2.0,
//!   "theorem": "ordered",
//!   "x0": "0"
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checks::{ExpansiveProblem, Sampling, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::mapping::Mapping;
use crate::solve::SolverConfig;
use crate::space::{FiniteSpace, Label, PartialOrder, Point, Space, DEFAULT_DEPTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    ShrinkingFractions {
        #[serde(default = "default_depth")]
        depth: u64,
    },
    RealInterval {
        a: f64,
        b: f64,
    },
    Finite {
        points: Vec<Label>,
        distance: Vec<Vec<f64>>,
    },
}

fn default_depth() -> u64 {
    DEFAULT_DEPTH
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Space> {
        match self {
            SpaceSpec::ShrinkingFractions { depth } => Space::shrinking_fractions(*depth),
            SpaceSpec::RealInterval { a, b } => Space::interval(*a, *b),
            SpaceSpec::Finite { points, distance } => {
                Ok(Space::Finite(FiniteSpace::new(points.clone(), distance.clone())?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrderSpec {
    Usual,
    Example1,
    Diagonal,
    /// Listed pairs `[x, z]` meaning `x ≼ z`; the diagonal is added.
    Table {
        pairs: Vec<(Label, Label)>,
        #[serde(default)]
        regular: bool,
    },
}

impl OrderSpec {
    pub fn build(&self, space: &Space) -> Result<PartialOrder> {
        let order = match self {
            OrderSpec::Usual => PartialOrder::usual(),
            OrderSpec::Example1 => PartialOrder::example1(),
            OrderSpec::Diagonal => PartialOrder::diagonal(),
            OrderSpec::Table { pairs, regular } => {
                let pts = pairs
                    .iter()
                    .map(|(x, z)| Ok((point_of(space, x)?, point_of(space, z)?)))
                    .collect::<Result<Vec<_>>>()?;
                let mut order = PartialOrder::table(space, pts, true);
                order.regular = *regular;
                order
            }
        };
        order.check_compatible(space)?;
        Ok(order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingSpec {
    Example1Shift,
    Linear {
        slope: f64,
    },
    Identity,
    /// Pairs `[x, Ux]`; every point of the space must appear exactly once.
    Table {
        pairs: Vec<(Label, Label)>,
    },
}

impl MappingSpec {
    pub fn build(&self, space: &Space, name: &str) -> Result<Mapping> {
        let mut m = match self {
            MappingSpec::Example1Shift => Mapping::example1_shift(),
            MappingSpec::Linear { slope } => Mapping::linear(*slope),
            MappingSpec::Identity => Mapping::identity(space)?,
            MappingSpec::Table { pairs } => {
                let Space::Finite(fs) = space else {
                    return Err(Error::UnsupportedSpace("table mappings need a finite space".into()));
                };
                let mut images = vec![None; fs.len()];
                for (x, ux) in pairs {
                    let (Point::Finite(i), Point::Finite(j)) = (point_of(space, x)?, point_of(space, ux)?) else {
                        unreachable!("finite spaces parse to finite points");
                    };
                    if images[i].replace(j).is_some() {
                        return Err(Error::InvalidConfig(format!("mapping {name} lists {x} twice")));
                    }
                }
                let images = images
                    .into_iter()
                    .enumerate()
                    .map(|(i, img)| {
                        img.ok_or_else(|| {
                            Error::InvalidConfig(format!("mapping {name} has no image for {}", fs.labels()[i]))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Mapping::table(name, images)
            }
        };
        m.name = name.to_string();
        m.check_compatible(space)?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Ordered iteration through `U*`, condition on comparable pairs.
    Ordered,
    /// Preimage iteration under the min condition.
    Min,
    /// Two-map iteration for a common fixed point.
    Common,
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered" => Ok(Theorem::Ordered),
            "min" => Ok(Theorem::Min),
            "common" => Ok(Theorem::Common),
            other => Err(Error::InvalidConfig(format!(
                "unknown theorem '{other}' (expected ordered, min or common)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_window")]
    pub cauchy_window: usize,
}

fn default_tol() -> f64 {
    SolverConfig::default().tol
}

fn default_max_iter() -> usize {
    SolverConfig::default().max_iter
}

fn default_window() -> usize {
    SolverConfig::default().cauchy_window
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            tol: default_tol(),
            max_iter: default_max_iter(),
            cauchy_window: default_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderSpec>,
    pub u: MappingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<MappingSpec>,
    pub growth: GrowthFunction,
    pub eta: f64,
    #[serde(default = "default_theorem")]
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Label>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_theorem() -> Theorem {
    Theorem::Ordered
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

/// A spec resolved against its space.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub expansive: ExpansiveProblem,
    pub x0: Option<Point>,
    pub solver: SolverConfig,
}

impl Problem {
    pub fn space(&self) -> &Space {
        &self.expansive.space
    }
}

fn point_of(space: &Space, label: &Label) -> Result<Point> {
    space.parse_point(&label.to_string())
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text, "<input>")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 1.0) {
            return Err(Error::InvalidEta(self.eta));
        }
        self.growth.validate()?;
        self.solver_config().validate()?;
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        if self.theorem == Theorem::Common && self.v.is_none() {
            return Err(Error::MissingMapping);
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            cauchy_window: self.solver.cauchy_window,
            eta: Some(self.eta),
        }
    }

    pub fn build(&self) -> Result<Problem> {
        self.validate()?;
        let space = self.space.build()?;
        let u = self.u.build(&space, "U")?;
        let mut p = ExpansiveProblem::new(space.clone(), u, self.growth.clone(), self.eta)?.with_sampling(Sampling {
            samples: self.samples,
            seed: self.seed,
        });
        if let Some(order) = &self.order {
            p = p.with_order(order.build(&space)?)?;
        }
        if let Some(v) = &self.v {
            p = p.with_v(v.build(&space, "V")?)?;
        }
        let x0 = self.x0.as_ref().map(|l| point_of(&space, l)).transpose()?;
        Ok(Problem {
            spec: self.clone(),
            expansive: p,
            x0,
            solver: self.solver_config(),
        })
    }
}

fn parse_json(text: &str, origin: &str) -> Result<ProblemSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.inner();
        Error::SpecParse {
            path: if path == "." { origin.to_string() } else { format!("{origin}: {path}") },
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}
