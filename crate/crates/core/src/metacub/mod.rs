//! Bi-level allocation: a simulation-guided search over sub-budget
//! fractions per (group, resource) cell, and greedy optimistic selection of
//! individuals inside each cell.

mod base;
mod meta;
mod policy;
mod simplex;

pub use base::{base_allocate, cell_counts, AllocationLimits, BaseAllocation, ScoredCandidate};
pub use meta::{
    meta_optimize, select_candidate, simulate_utility, CohortPredictions, MetaEvaluation, MetaOptimization,
    MetaOptimizerConfig,
};
pub use policy::{CellEntitlements, MetaCubPolicy, MetaRecord};
pub use simplex::{sample_sub_simplex, MetaPolicy};
