//! Line-broadcasting schedules on complete k-ary trees.
//!
//! In the line model an informed vertex may call any other vertex in one
//! time unit, along the unique tree path between them; calls placed in the
//! same unit must use edge-disjoint paths and every vertex sends and
//! receives at most one call per unit. The cost of a call is the length of
//! its path. This crate builds broadcast schedules that finish within
//! `⌈log₂ n⌉` units while keeping the total cost near `2n`, validates
//! arbitrary schedules, evaluates the closed-form cost bounds exactly, and
//! finds true optima on very small trees by exhaustive search.

pub mod algorithms;
pub mod bounds;
pub mod error;
pub mod json;
pub mod ktree;
pub mod oracle;
mod pairing;
mod planner;
pub mod procedures;
pub mod schedule;

pub use algorithms::{alg1, alg2, alg3, lbckt, lbckt_case, Algorithm, DispatchCase};
pub use bounds::{BoundsReport, Rational};
pub use error::{Error, Result};
pub use ktree::{CompleteKTree, Edge, VertexRef};
pub use schedule::{
    Call, Coverage, Deviation, Schedule, Step, ValidationReport, Violation, ViolationKind,
};
