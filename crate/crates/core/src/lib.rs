//! Random recursive trees and their Kingman n-coalescent construction.
//!
//! - [`tree`]: parent-array trees, direct RRT growth and structural queries.
//! - [`coalescent`]: the coalescent, its coin-flip description of degree,
//!   depth and label, truncated selection sets and an exact sampler
//!   conditioned on minimum degrees.
//! - [`oracle`]: exhaustive enumeration at small `n` with rational weights.
//! - [`limits`]: limit laws, normalisations and goodness-of-fit statistics.
//! - [`experiments`]: Monte Carlo drivers with reproducible replicate streams.

pub mod coalescent;
pub mod error;
pub mod experiments;
pub mod limits;
pub mod oracle;
pub mod seed;
pub mod tree;

pub use coalescent::{
    run_coalescent, sample_conditional_degrees, sample_selection, stats_from_flips, tau, truncate,
    CoalescentTrace, ConditionalSample, Merge, RankMerge, Selection, SelectionRecord,
    TruncatedView,
};
pub use error::{Error, Result};
pub use oracle::{ExactPmf, Prob};
pub use seed::SimRng;
pub use tree::{build_rrt, top_degree_order, TreeTopology, Vertex, VertexStats};
