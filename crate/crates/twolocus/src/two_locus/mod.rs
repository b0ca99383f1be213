//! The extended two-locus sample configuration, canonical labeling, degree
//! bookkeeping, and the exact solver for the two-locus stationary recursion
//! via per-degree coupled linear systems.

mod config;
pub(crate) mod degree_system;
mod enumerate;
mod recursion;
mod solver;

pub use config::{Canonical, Params, TwoLocusConfig, CANONICAL_DIM_LIMIT};
pub use degree_system::DegreeSystem;
pub use enumerate::{enumerate_canonical_configs, EnumerationConstraints};
pub use recursion::{golding_neighbors, GoldingTerms, NeighborTerm};
pub use solver::{exact_q, ExactSolver, DEFAULT_STATE_BUDGET};
