//! Simulation and inference for the Independent Cascade model of rumor
//! spreading.
//!
//! * [`graph`]: networks, random generators, truncated BFS.
//! * [`cascade`]: one-shot cascades on finite graphs.
//! * [`tree_sim`]: cascades on infinite d-regular and Poisson Galton–Watson
//!   trees, materialized lazily, plus the closest-candidate estimator.
//! * [`inference`]: minimum-radius ball intersection on cyclic graphs.
//! * [`likelihood`]: exact and Monte-Carlo likelihoods and the posterior over sources.
//! * [`analytics`]: extinction recurrences, subtree-count law, Bessel series.
//! * [`experiment`]: seeded parallel sweeps producing the summary tables.
//! * [`cli`]: the `rumor` command-line front end.

pub mod analytics;
pub mod cascade;
pub mod cli;
pub mod experiment;
pub mod graph;
pub mod inference;
pub mod likelihood;
pub mod rng;
pub mod tree_sim;

pub use graph::{Graph, NodeId};
pub use rng::{stream_rng, SimRng};
