//! Discrete laboratory for Lorentzian causality in 1+1 dimensions.
//!
//! Analytic spacetimes are sampled into weighted causal DAGs whose edge
//! weights are proper times of straight segments. On those graphs the crate
//! computes Lorentzian distances as longest paths, builds achronal splitting
//! surfaces and hattings, constructs steep generalised time functions, and
//! verifies the distance formula as exact longest-path / potential duality.

// `!(x >= 0.0)` style checks reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod achronal;
pub mod distance;
pub mod error;
pub mod graph;
pub mod metric;
pub mod sampling;
pub mod timefn;

pub use achronal::{DivergentChain, NodeSet, SetTag};
pub use distance::{DistanceField, RefinementLadder};
pub use error::{Error, Result};
pub use graph::{CausalGraph, Edge, NodeId};
pub use metric::{CausalCharacter, CausalPath, FrameSpec, MetricModel, ModelKind, Point, Tensor};
pub use sampling::{SamplingMode, SamplingSpec, Window};
pub use timefn::{GradientEstimate, ScalarField};
