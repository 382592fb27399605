//! Combinatorial action sets encoded as source-sink paths.
//!
//! Each reduction builds a DAG, a bijection between domain actions and
//! paths, and a loss lift such that the domain loss of an action equals the
//! weight of its path under the lifted edge weights.

mod blotto;
mod efg;
mod hypercube;
mod msets;
mod multitask;
mod walk;

pub use blotto::{Blotto, BlottoLoss};
pub use efg::{example_game, Efg, EfgGame, EfgLoss, EfgNode};
pub use hypercube::Hypercube;
pub use msets::MSets;
pub use multitask::Multitask;
pub use walk::ShortestWalk;

use crate::error::Result;
use crate::graph::{Dag, PathIncidence};

pub trait Reduction {
    type Action: Clone + std::fmt::Debug + PartialEq;
    type Loss;

    fn dag(&self) -> &Dag;
    /// Path of an action.
    fn encode(&self, action: &Self::Action) -> Result<PathIncidence>;
    /// Action of a path.
    fn decode(&self, path: &PathIncidence) -> Result<Self::Action>;
    /// Edge weights realizing a domain loss.
    fn lift_loss(&self, loss: &Self::Loss) -> Vec<f64>;
    /// Loss of an action computed directly in the domain.
    fn domain_loss(&self, action: &Self::Action, loss: &Self::Loss) -> f64;
    /// Codec description for external tools.
    fn metadata(&self) -> serde_json::Value;
}
