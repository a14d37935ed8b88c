//! Expansive mappings on partially ordered metric spaces.
//!
//! The crate models small metric spaces with an optional partial order,
//! growth functions `φ` used to state expansive inequalities, and a handful
//! of self-maps. On top of these it provides
//!
//! * checkers for the expansive conditions ([`checks`]),
//! * constructive fixed-point iterations with diagnostics ([`solve`]),
//! * a JSON problem format and run reports ([`spec`], [`run`]),
//! * a gallery of worked examples ([`gallery`]).

pub mod checks;
pub mod error;
pub mod gallery;
pub mod growth;
pub mod mapping;
pub mod report;
pub mod run;
pub mod solve;
pub mod space;
pub mod spec;

/// Equality tolerance for real-valued points and distances.
pub const TAU_EQ: f64 = 1e-12;

pub use error::{Error, Result};
pub use growth::GrowthFunction;
pub use mapping::{Mapping, RightInverse};
pub use report::{CheckReport, Verdict, Witness};
pub use solve::{IterationTrace, SolverConfig, TraceVerdict};
pub use space::{PartialOrder, Point, Space};
