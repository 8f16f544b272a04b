//! Combinatorial reengineering toolkit.
//!
//! The crate covers the evaluation of modular systems on ordinal/poset
//! scales, Pareto-efficient composition synthesis under pairwise
//! compatibility, budgeted improvement planning with multiple-choice
//! knapsack solvers, restructuring of existing solutions, budgeted graph
//! recoloring, tree upgrades (hotlinks, Steiner points) and a small
//! network workflow (clustering, outranking, capacitated assignment).
//!
//! Every solver is a pure function over immutable inputs.

pub mod error;
pub mod instance;
pub mod model;
pub mod netassign;
pub mod num;
pub mod planner;
pub mod recolor;
pub mod restructure;
pub mod synthesis;
pub mod trees;

pub use error::{Error, Result};
