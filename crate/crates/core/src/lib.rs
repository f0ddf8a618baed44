//! Simulation and verification toolkit for cutting down weighted random
//! trees (p-trees) and inhomogeneous continuum random trees.
//!
//! * [`ptree`]: weights, rooted trees, the weighted Aldous–Broder sampler.
//! * [`cutting`]: one-vertex, k-vertex and complete cutting procedures.
//! * [`shuffle`]: the reverse rewiring transformations.
//! * [`icrt`]: line-breaking construction, cut measure and continuum cuts.
//! * [`stats`]: exact oracles and goodness-of-fit machinery.
//! * [`verify`]: the named verification suites.

pub mod cutting;
pub mod error;
pub mod icrt;
pub mod metric;
pub mod ptree;
pub mod rng;
pub mod shuffle;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use ptree::{ProbWeights, RootedTree, SpanTree};
