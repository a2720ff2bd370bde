//! (k, l)-median clustering of univariate time series under the discrete
//! Frechet distance.
//!
//! The crate provides the full pipeline: exact discrete Frechet distances,
//! minimum-error complexity-l simplification, value-domain quantization,
//! profile-based complexity reduction of whole datasets, candidate center
//! generation, and k-median solvers (exhaustive and local search) with
//! deterministic, seedable behavior throughout.

pub mod candidates;
pub mod cluster;
pub mod error;
pub mod frechet;
pub mod profile;
pub mod reduce;
pub mod rng;
pub mod series;
pub mod simplify;

pub use candidates::{candidate_ball, candidate_centers, estimate_opt_cost, CandidateSet, C_EST};
pub use cluster::{
    exhaustive_kmedian, exhaustive_kmedian_capped, kmedian_cost, kmedian_pipeline,
    local_search_kmedian, ClusterSolution, PipelineConfig, PipelineOutcome, PipelineStats,
    Solver, DEFAULT_SOLVE_CAP,
};
pub use error::Error;
pub use frechet::{
    brute_force_frechet, count_traversals, discrete_frechet, enumerate_traversals,
    enumerate_traversals_capped, DistanceValue, DEFAULT_TRAVERSAL_CAP,
};
pub use profile::{
    assignment_dp, brute_profile_set, profile_set, traversal_sectors, Profile, ProfileSet,
};
pub use reduce::{
    complexity_reduction, reduce_dataset, reduce_value_domain, QuantizedSeries, Reduction,
    ReductionCache, DEFAULT_REDUCTION_CAP,
};
pub use rng::SplitMix64;
pub use series::{RankSequence, TimeSeries, Traversal};
pub use simplify::{min_error_simplification, simplify_decide, Simplification};
