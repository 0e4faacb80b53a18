//! Exact and Monte-Carlo analysis of the space of proper colourings of
//! sparse graphs.

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod colouring;
pub mod domination;
pub mod enumeration;
pub mod error;
#[cfg(test)]
mod fixtures;
pub mod geometry;
pub mod graph;
pub mod percolation;
pub mod rng;
pub mod sampling;

pub use colouring::{
    available_list, hamming_distance, is_proper, AvailableList, Colour, Colouring, ListAssignment,
};
pub use domination::{
    check_ber_domination, check_negative_correlation, renormalise_and_check,
    subset_product_expectations, BinaryFamilySpec, JointDistribution, SubsetExpectations,
};
pub use enumeration::{count_colourings, enumerate_colourings, CountResult, Enumerator};
pub use error::{Error, Result};
pub use geometry::{build_view, classify_vertex, count_frozen, ColouringGraphView, VertexStatus};
pub use graph::{generate, Girth, Graph, GraphFamilySpec};
pub use percolation::{
    estimate_root_probability, exact_root_probability_small, propagate, LeafModel,
    PercolationInstance,
};
pub use sampling::{
    glauber_step, greedy_colour, local_search_colour, neighbourhood_resample, sample_batch,
    sample_uniform, Sampler, SamplerConfig, SamplingMethod,
};
