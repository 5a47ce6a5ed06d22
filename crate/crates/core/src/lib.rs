//! Weighted Benjamini-Hochberg procedures for grouped hypotheses.
//!
//! Hypotheses can be classified by a single hierarchy (possibly with
//! overlapping groups), by several one-level classifications at once, or by
//! several hierarchies. Each structure has an oracle weighting built from the
//! true null proportions and a data-adaptive weighting that estimates them.

pub mod classification;
pub mod error;
pub mod format;
pub mod layouts;
pub mod numeric;
pub mod procedure;
pub mod simulate;
pub mod testing;
pub mod validate;
pub mod weights;

pub use classification::{
    group_stats, leaf_memberships, validate_forest, ClassificationForest, GroupNode, GroupStats,
    HierTree, TruthAssignment, ValidationReport, Violation,
};
pub use error::{Error, Result};
pub use procedure::{compute_weights, run_method, Method};
pub use testing::{
    outcome_metrics, weighted_bh, weighted_bh_bruteforce, weighted_pvalues, OutcomeMetrics,
    TestOutcome,
};
pub use weights::{
    adaptive_flat_weights, adaptive_leaf_effects, da_gen_weights, da_hier_weights, da_sway_weights,
    oracle_flat_weights, oracle_gen_weights, oracle_group_effects, oracle_hier_weights,
    oracle_hier_weights_with, oracle_overlap_oneway_weights, oracle_sway_weights,
    storey_null_estimate, AdaptiveOptions, AncestorEstimate, EffectRecursion, GroupEffect,
    LeafEffect, NullCountEstimate, WeightVector,
};
