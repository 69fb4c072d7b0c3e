//! Flattening of multiparameter hierarchical clusterings.
//!
//! A clustering algorithm indexed by a partially ordered hyperparameter space
//! produces one partition per hyperparameter value. Given a probability
//! measure over that space, [`flatten::flatten`] selects the pairwise-disjoint
//! family of clusters with the largest expected number of appearances by
//! solving an exact binary integer program. The measure itself can be learned
//! from labeled partitions with [`bayes::bayes_update_all`].

pub mod bayes;
pub mod bip;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod flatten;
pub mod harness;
pub mod metric;
pub mod partition;

pub use error::{Error, Result};
