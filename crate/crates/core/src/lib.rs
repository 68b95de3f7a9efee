//! Graphon-based feasibility scoring for graph pre-training.
//!
//! Pre-training (sub)graphs are summarized by step-function graphons fitted
//! with the largest-gap estimator. Three bases are built from them (one pooled
//! graphon, one per source domain, one per topological cluster), and for each
//! basis the convex mixture closest to the downstream graphon under entropic
//! Gromov-Wasserstein distance is found by gradient descent on the mixture
//! weights. The feasibility score is the negated smallest such distance.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | graphs, edge-list I/O, ego-network sampling |
//! | [`features`] | degree/clustering/closeness/density/assortativity/transitivity |
//! | [`graphon`] | step graphons, largest-gap estimation, resampling, W-random sampling, mixing |
//! | [`motif`] | homomorphism densities, exact cut norm, counting/concentration checks |
//! | [`gw`] | entropic Gromov-Wasserstein solver and its envelope gradient |
//! | [`feasibility`] | bases, mixture optimization, feasibility score, data selection |
//! | [`baselines`] | MMD and spectral transferability baselines, Pearson correlation |
//! | [`catalog`], [`cli`], [`verify`] | dataset catalogs, the `pfeas` command line, property suites |
//!
//! ## Quick start
//!
//! ```
//! use pretrain_feasibility::graphon::{sample_graph, Graphon};
//!
//! let g = sample_graph(&Graphon::constant(4, 1.0).unwrap(), 5, 7);
//! assert_eq!(g.edge_count(), 10);
//! ```

pub mod baselines;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod feasibility;
pub mod features;
pub mod graph;
pub mod graphon;
pub mod gw;
mod kmeans;
pub mod motif;
pub mod verify;

pub use error::{Error, Result};
pub use graph::Graph;
pub use graphon::Graphon;

/// Deterministic per-stream seed derived from a base seed (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
