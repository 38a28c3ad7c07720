//! Exact solvers for extremal planar matchings of complete bipartite
//! graphs (maximum size under an edge-length constraint, minimum weight
//! under an edge-count constraint) together with random-instance
//! generators, closed-form bound evaluators, and a reproducible Monte
//! Carlo harness that exercises those bounds at desk scale.
//!
//! All operations are pure and every sampled object is a deterministic
//! function of `(master_seed, trial_index)`, so any run can be replayed
//! bit-identically at any worker count.

#![forbid(unsafe_code)]

pub mod bipartite;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod solvers;
pub mod stats;
pub mod stochastic;

pub use bipartite::{
    count_length_bounded_edges, edge_length, validate_planar, BipartiteInstance, Edge,
    PlanarMatching,
};
pub use bounds::{BoundKind, BoundReport};
pub use error::{Error, Result};
pub use solvers::{
    brute_force_max_size, brute_force_min_weight, build_conflict_graph, greedy_stable_set,
    max_size_planar, min_weight_planar, min_weight_value, segmentation_matching, ConflictGraph,
    MaxSizeResult, MinWeightResult,
};
pub use stochastic::{
    average_edge_probability, quantile_s, quantile_t, sample_states, sample_weights,
    EdgeProbabilityModel, SeedSpec, WeightDistribution,
};
