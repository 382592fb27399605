//! Bandit online shortest paths on directed acyclic graphs.
//!
//! The learner runs follow-the-regularized-leader with the square-root
//! regularizer over the flow polytope, optionally augmented with path-length
//! bits and optionally on a compressed graph whose paths are logarithmically
//! short. Combinatorial action sets reduce to path selection through the
//! constructions in [`reductions`].

pub mod augment;
pub mod compress;
pub mod error;
pub mod estimators;
pub mod format;
pub mod ftrl;
pub mod generators;
pub mod graph;
pub mod learner;
mod linalg;
pub mod reductions;
pub mod sampler;

pub use error::{Error, Result};
pub use graph::{Dag, PathIncidence, PruneMap};
pub use learner::{
    run_episode, Adversary, GammaOverride, Learner, LearnerConfig, Mode, Policy, RegretReport,
    RoundLog,
};
