//! Consensus clustering from an ensemble of base partitions.
//!
//! The pipeline weights a co-association matrix by each member's cluster
//! count and agreement with the rest of the ensemble, reads the number of
//! clusters off the most stable connected-component count of a threshold
//! sweep, relabels the finer members onto a reference partition, and runs
//! NSGA-II over label vectors to maximize mean ARI while minimizing its
//! spread. A nearest-centroid model maps new points onto the result.
//!
//! With the default `parallel` feature the data-parallel kernels (pairwise
//! ARI, matrix construction, objective evaluation, k-means assignment and
//! ensemble generation) run on rayon; outputs are identical either way.

pub mod coassoc;
pub mod error;
pub mod generation;
pub mod io;
pub mod mapping;
pub mod metrics;
pub mod model;
pub mod moea;
pub mod par;
pub mod pipeline;
pub mod relabel;
pub mod scaling;

pub use error::{Error, Result};
pub use metrics::{adjusted_rand_index, objectives, ObjectiveVector};
pub use model::{
    canonicalize, partition_equal, Clustering, ClusteringEnsemble, DataMatrix, RandomSeed,
};
